#include <cmath>
#include <random>

#include "doctest.h"
#include "movingns/errors.hpp"
#include "movingns/geometry.hpp"
#include "movingns/stream_basis.hpp"

using namespace movingns;

TEST_CASE("identity map metric") {
    const auto map = make_identity_map(1.0);
    const MetricSample ms = metric_at(map, {0.3, 0.7}, 0.5);
    CHECK(ms.M.max_abs_diff(Mat2::identity()) == 0.0);
    CHECK(ms.J == doctest::Approx(1.0));
    CHECK(ms.h_up.max_abs_diff(Mat2::identity()) == 0.0);
    CHECK(ms.h_down.max_abs_diff(Mat2::identity()) == 0.0);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(ms.Phi[k][i][j] == 0.0);
    CHECK(ms.dy_dt[0] == 0.0);
    CHECK(ms.dy_dt[1] == 0.0);
}

TEST_CASE("dilation map metric at s=1") {
    const auto map = make_dilation_map("1+t", 2.0);
    const MetricSample ms = metric_at(map, {0.3, 0.7}, 1.0);
    CHECK(ms.M.m[0][0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ms.M.m[1][1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ms.M.m[0][1] == 0.0);
    CHECK(ms.J == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(ms.h_up.m[0][0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(ms.h_down.m[0][0] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(ms.h_down.m[1][1] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(ms.dy_dt[0] == doctest::Approx(-0.15).epsilon(1e-14));
    CHECK(ms.dy_dt[1] == doctest::Approx(-0.35).epsilon(1e-14));
    CHECK(ms.d2x_dsdy.max_abs_diff(Mat2::identity()) < 1e-14);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(ms.Phi[k][i][j] == 0.0);
}

TEST_CASE("rotation map keeps the metric euclidean") {
    const auto map = make_rotation_map("t", 1.0);
    std::mt19937_64 rng(3);
    for (int n = 0; n < 20; ++n) {
        const Vec2 y{(rng() >> 11) * 0x1.0p-53, (rng() >> 11) * 0x1.0p-53};
        const double s = (rng() >> 11) * 0x1.0p-53;
        const MetricSample ms = metric_at(map, y, s);
        CHECK(ms.J == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(ms.h_up.max_abs_diff(Mat2::identity()) < 1e-13);
    }
}

TEST_CASE("shear map jacobians") {
    const auto map = make_shear_map("t", 1.0);
    const MetricSample ms = metric_at(map, {0.4, 0.6}, 0.5);
    CHECK(ms.K.m[0][1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(ms.M.m[1][0] == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(ms.J == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ms.dy_dt[0] == doctest::Approx(-0.6).epsilon(1e-14));
    CHECK(ms.d2x_dsdy.m[0][1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bend map carries nonzero Christoffel symbols") {
    const auto map = make_bend_map(0.3, 1.0);
    const Vec2 y{0.4, 0.3};
    const double s = 0.5;
    const MetricSample ms = metric_at(map, y, s);
    // only Phi^1_22 = -g(s) pi^2 sin(pi y2) is nonzero
    const double expect = -0.3 * s * M_PI * M_PI * std::sin(M_PI * y[1]);
    CHECK(ms.Phi[0][1][1] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(ms.Phi[1][0][0] == 0.0);
    CHECK(ms.Phi[0][0][0] == 0.0);
    CHECK(ms.J == doctest::Approx(1.0).epsilon(1e-14));

    // analytic third derivatives against the finite-difference fallback
    double dphi_a[2][2][2][2], dphi_fd[2][2][2][2];
    phi_gradient(map, y, s, dphi_a);
    MovingDomainMap fd = map;
    fd.d3x_dydydy = nullptr;
    phi_gradient(fd, y, s, dphi_fd);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int a = 0; a < 2; ++a)
                    CHECK(dphi_a[k][i][j][a] ==
                          doctest::Approx(dphi_fd[k][i][j][a]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("metric identities hold on every built-in map") {
    const double T = 1.0;
    for (const auto& map :
         {make_identity_map(T), make_dilation_map("1+0.5*t", T), make_rotation_map("0.7*t", T),
          make_shear_map("0.3*t", T), make_bend_map(0.4, T)}) {
        CHECK(metric_consistency_residual(map, 300, 5) < 1e-10);
        CHECK(inverse_identity_residual(map, 300, 6) < 1e-10);
        CHECK(jacobian_constancy_residual(map, 100, 10, 7) < 1e-10);
        CHECK(phi_route_residual(map, 50, 8) < 1e-8);
    }
}

TEST_CASE("push_forward of a constant field under dilation") {
    const auto map = make_dilation_map("1+t", 2.0);
    const VectorFieldSampler gamma{[](const Vec2&, double) { return Vec2{1.0, 0.0}; },
                                   Frame::physical};
    const VectorFieldSampler tilde = push_forward(map, gamma);
    const Vec2 v = tilde.eval({0.3, 0.8}, 1.0);
    CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(v[1] == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)push_forward(map, tilde), FrameMismatch);
}

TEST_CASE("pull_back inverts push_forward") {
    const auto map = make_shear_map("0.4*t", 1.0);
    const VectorFieldSampler gamma{
        [](const Vec2& x, double t) {
            return Vec2{std::sin(x[0] + t), std::cos(x[1] - 0.3 * t)};
        },
        Frame::physical};
    const VectorFieldSampler round = pull_back(map, push_forward(map, gamma));
    std::mt19937_64 rng(9);
    for (int n = 0; n < 50; ++n) {
        const Vec2 y{(rng() >> 11) * 0x1.0p-53, (rng() >> 11) * 0x1.0p-53};
        const double s = (rng() >> 11) * 0x1.0p-53;
        const Vec2 x = map.inverse(y, s);
        const Vec2 a = gamma.eval(x, s), b = round.eval(x, s);
        CHECK(std::abs(a[0] - b[0]) < 1e-12);
        CHECK(std::abs(a[1] - b[1]) < 1e-12);
    }
    // dilation spot value: reference (1,0) pulls back through M^{-1} = diag(2,2)
    const auto dil = make_dilation_map("1+t", 2.0);
    const VectorFieldSampler ref{[](const Vec2&, double) { return Vec2{1.0, 0.0}; },
                                 Frame::reference};
    const Vec2 u = pull_back(dil, ref).eval({0.5, 0.5}, 1.0);
    CHECK(u[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("a corrupted inverse is caught by the identity residual") {
    auto map = make_dilation_map("1+t", 1.0);
    map.jac_inverse = [](const Vec2&, double) { return Mat2::identity(); };  // wrong K
    CHECK(inverse_identity_residual(map, 100, 4) > 0.1);
}

TEST_CASE("divergence residual separates solenoidal from generic fields") {
    const auto map = make_dilation_map("1+t", 1.0);
    // reference frame: raw stream element, exactly divergence-free
    const StreamElement e{1, 2};
    const VectorFieldSampler ref{[e](const Vec2& y, double) { return e.value(y); },
                                 Frame::reference};
    CHECK(divergence_residual(map, ref, 0.5, 100, 1e-4, 11) < 1e-5);
    // its pull-back stays divergence-free in the physical frame
    const VectorFieldSampler phys = pull_back(map, ref);
    const double r1 = divergence_residual(map, phys, 0.5, 100, 1e-3, 11);
    const double r2 = divergence_residual(map, phys, 0.5, 100, 5e-4, 11);
    CHECK(r1 < 1e-3);
    CHECK(r2 < 0.3 * r1);  // second-order decay
    // a field with unit divergence
    const VectorFieldSampler bad{[](const Vec2& y, double) { return Vec2{y[0], 0.0}; },
                                 Frame::reference};
    CHECK(divergence_residual(map, bad, 0.5, 100, 1e-4, 11) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("out-of-domain and degenerate-jacobian errors") {
    const auto map = make_identity_map(1.0);
    CHECK_THROWS_AS((void)metric_at(map, {1.5, 0.5}, 0.5), OutOfDomain);
    auto flat = make_identity_map(1.0);
    flat.jac_forward = [](const Vec2&, double) { return Mat2{{{1e-12, 0.0}, {0.0, 1e-12}}}; };
    CHECK_THROWS_AS((void)metric_at(flat, {0.5, 0.5}, 0.5), NonInvertibleJacobian);
}

TEST_CASE("user map from expressions reproduces the dilation metrics") {
    const auto user = make_user_map("x1/(1+t)", "x2/(1+t)", "(1+s)*y1", "(1+s)*y2", 1.0);
    const auto exact = make_dilation_map("1+t", 1.0);
    const MetricSample a = metric_at(user, {0.3, 0.7}, 0.5);
    const MetricSample b = metric_at(exact, {0.3, 0.7}, 0.5);
    CHECK(a.M.max_abs_diff(b.M) < 1e-8);
    CHECK(a.J == doctest::Approx(b.J).epsilon(1e-8));
    CHECK(std::abs(a.dy_dt[0] - b.dy_dt[0]) < 1e-7);
    CHECK(a.d2x_dsdy.max_abs_diff(b.d2x_dsdy) < 1e-5);
    CHECK(inverse_identity_residual(user, 100, 12) < 1e-8);
}
