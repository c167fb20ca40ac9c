#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "movingns/errors.hpp"

namespace movingns::expr {

// First-order dual number: carries a value and one directional derivative.
struct Dual {
    double v = 0.0;
    double d = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dual sin(Dual a) { return {std::sin(a.v), std::cos(a.v) * a.d}; }
inline Dual cos(Dual a) { return {std::cos(a.v), -std::sin(a.v) * a.d}; }
inline Dual tan(Dual a) {
    const double c = std::cos(a.v);
    return {std::tan(a.v), a.d / (c * c)};
}
inline Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, e * a.d};
}
inline Dual log(Dual a) { return {std::log(a.v), a.d / a.v}; }
inline Dual sqrt(Dual a) {
    const double s = std::sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}
inline Dual abs(Dual a) { return {std::abs(a.v), a.v < 0.0 ? -a.d : a.d}; }
inline Dual pow(Dual a, Dual b) {
    const double p = std::pow(a.v, b.v);
    // d/dx a^b = a^b (b' ln a + b a'/a); the log term only matters for dual exponents
    double d = 0.0;
    if (a.v != 0.0) d = p * (b.d * std::log(std::abs(a.v)) + b.v * a.d / a.v);
    return {p, d};
}

/// Arithmetic expression over named variables, parsed once into a small AST.
/// Grammar: + - * / ^ (right assoc), unary -, parentheses, number literals,
/// `pi`, and the functions sin cos tan exp log sqrt abs.
/// eval() computes a double; eval_dual() propagates first derivatives.
class Expression {
  public:
    static Expression parse(const std::string& text, const std::vector<std::string>& vars);

    double eval(std::span<const double> vars) const;
    Dual eval_dual(std::span<const Dual> vars) const;

    const std::string& text() const { return text_; }

  private:
    enum class Op { constant, variable, add, sub, mul, div, pow_, neg, fsin, fcos, ftan, fexp, flog, fsqrt, fabs_ };
    struct Node {
        Op op;
        double value = 0.0;  // constant
        int index = -1;      // variable slot, or child indices
        int lhs = -1, rhs = -1;
    };

    template <class T>
    T eval_node(int node, std::span<const T> vars) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;

    friend class Parser;
};

}  // namespace movingns::expr
