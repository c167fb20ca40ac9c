#pragma once

#include <stdexcept>
#include <string>

namespace movingns {

// The map violates (A1): |det M| fell below the configured floor.
struct NonInvertibleJacobian : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FrameMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Near linear dependence of the raw basis at the requested mode count.
struct DegenerateBasis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFinite : std::runtime_error {
    int node = -1;
    NonFinite(const std::string& what, int failing_node)
        : std::runtime_error(what), node(failing_node) {}
};

struct ParseError : std::runtime_error {
    int line = 0;
    ParseError(const std::string& what, int line_no) : std::runtime_error(what), line(line_no) {}
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace movingns
