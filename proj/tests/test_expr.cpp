#include <array>
#include <cmath>

#include "doctest.h"
#include "movingns/errors.hpp"
#include "movingns/expr.hpp"

using movingns::ParseError;
using movingns::expr::Dual;
using movingns::expr::Expression;

namespace {
double ev(const std::string& text, double t) {
    const auto e = Expression::parse(text, {"t"});
    return e.eval(std::array<double, 1>{t});
}
Dual dv(const std::string& text, double t) {
    const auto e = Expression::parse(text, {"t"});
    return e.eval_dual(std::array<Dual, 1>{Dual{t, 1.0}});
}
}  // namespace

TEST_CASE("arithmetic and precedence") {
    CHECK(ev("2*t+1", 3.0) == doctest::Approx(7.0));
    CHECK(ev("2+3*4^2", 0.0) == doctest::Approx(50.0));
    CHECK(ev("-2^2", 0.0) == doctest::Approx(-4.0));
    CHECK(ev("(1+t)*(1-t)", 0.5) == doctest::Approx(0.75));
    CHECK(ev("sin(pi*t)", 0.5) == doctest::Approx(1.0));
    CHECK(ev("2^3^2", 0.0) == doctest::Approx(512.0));  // right associative
}

TEST_CASE("dual derivatives match closed forms") {
    CHECK(dv("1+t^2", 2.0).d == doctest::Approx(4.0));
    CHECK(dv("1+t", 0.7).d == doctest::Approx(1.0));
    const Dual d = dv("exp(-t)*cos(2*t)", 0.3);
    const double ref = -std::exp(-0.3) * std::cos(0.6) - 2.0 * std::exp(-0.3) * std::sin(0.6);
    CHECK(d.d == doctest::Approx(ref).epsilon(1e-12));
    CHECK(dv("sqrt(t)", 4.0).d == doctest::Approx(0.25));
    CHECK(dv("log(t)", 2.0).d == doctest::Approx(0.5));
}

TEST_CASE("multi-variable expressions") {
    const auto e = Expression::parse("x1 + 2*x2*t", {"x1", "x2", "t"});
    CHECK(e.eval(std::array<double, 3>{1.0, 2.0, 3.0}) == doctest::Approx(13.0));
}

TEST_CASE("parse errors") {
    CHECK_THROWS_AS((void)Expression::parse("2*q", {"t"}), ParseError);
    CHECK_THROWS_AS((void)Expression::parse("foo(t)", {"t"}), ParseError);
    CHECK_THROWS_AS((void)Expression::parse("1+", {"t"}), ParseError);
    CHECK_THROWS_AS((void)Expression::parse("(1+t", {"t"}), ParseError);
    CHECK_THROWS_AS((void)Expression::parse("1 2", {"t"}), ParseError);
}
