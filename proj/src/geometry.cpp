#include "movingns/geometry.hpp"

#include <cmath>
#include <random>

#include "movingns/errors.hpp"
#include "movingns/expr.hpp"

namespace movingns {

namespace {

bool in_closed_square(const Vec2& y) {
    return y[0] >= -1e-12 && y[0] <= 1.0 + 1e-12 && y[1] >= -1e-12 && y[1] <= 1.0 + 1e-12;
}

// deterministic uniform in [0,1) from a raw 64-bit draw
double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

}  // namespace

MetricSample metric_at(const MovingDomainMap& map, const Vec2& y, double s) {
    if (!in_closed_square(y))
        throw OutOfDomain("metric_at: reference point outside the unit square");

    MetricSample out;
    out.y = y;
    out.s = s;
    const Vec2 x = map.inverse(y, s);
    out.M = map.jac_forward(x, s);
    out.K = map.jac_inverse(y, s);

    const double det_m = out.M.det();
    if (!(det_m > map.det_floor))
        throw NonInvertibleJacobian("det M = " + std::to_string(det_m) +
                                    " fell below the floor; map violates (A1)");
    out.J = 1.0 / det_m;

    // h^{ij} = sum_k (dy^i/dx^k)(dy^j/dx^k); h_{ij} = sum_k (dx^k/dy^i)(dx^k/dy^j).
    // h_down comes from the inverse-map Jacobian so the h_up*h_down = I
    // invariant genuinely tests forward/inverse consistency.
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            out.h_up.m[i][j] = out.M.m[0][i] * out.M.m[0][j] + out.M.m[1][i] * out.M.m[1][j];
            out.h_down.m[i][j] = out.K.m[0][i] * out.K.m[0][j] + out.K.m[1][i] * out.K.m[1][j];
        }

    // Phi^k_{ij} = sum_l (dy^k/dx^l) d2x^l/dy^i dy^j, with dy^k/dx^l = M[l][k]
    const Tensor222 d2 = map.d2x_dydy(y, s);
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.Phi[k][i][j] =
                    out.M.m[0][k] * d2.t[0][i][j] + out.M.m[1][k] * d2.t[1][i][j];

    out.dy_dt = map.dy_dt(y, s);
    out.d2x_dsdy = map.d2x_dsdy(y, s);
    return out;
}

void phi_gradient(const MovingDomainMap& map, const Vec2& y, double s, double dphi[2][2][2][2],
                  double fd_step) {
    if (map.d3x_dydydy) {
        // d_a Phi^k_{ij} = sum_l [ d_a(K^{-1})_{kl} D2[l][i][j] + (K^{-1})_{kl} D3[l][i][j][a] ]
        // with d_a(K^{-1}) = -K^{-1} (d_a K) K^{-1} and (d_a K)[l][b] = D2[l][b][a].
        const Tensor222 d2 = map.d2x_dydy(y, s);
        const Tensor2222 d3 = map.d3x_dydydy(y, s);
        const Mat2 kinv = map.jac_inverse(y, s).inverse();
        for (int a = 0; a < 2; ++a) {
            Mat2 dk;  // (d_a K)
            for (int l = 0; l < 2; ++l)
                for (int b = 0; b < 2; ++b) dk.m[l][b] = d2.t[l][b][a];
            Mat2 dkinv = kinv.mul(dk).mul(kinv);
            for (int k = 0; k < 2; ++k)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        double v = 0.0;
                        for (int l = 0; l < 2; ++l)
                            v += -dkinv.m[k][l] * d2.t[l][i][j] + kinv.m[k][l] * d3.t[l][i][j][a];
                        dphi[k][i][j][a] = v;
                    }
        }
        return;
    }
    for (int a = 0; a < 2; ++a) {
        Vec2 yp = y, ym = y;
        yp[static_cast<size_t>(a)] += fd_step;
        ym[static_cast<size_t>(a)] -= fd_step;
        const MetricSample mp = metric_at(map, yp, s), mm = metric_at(map, ym, s);
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    dphi[k][i][j][a] = (mp.Phi[k][i][j] - mm.Phi[k][i][j]) / (2.0 * fd_step);
    }
}

VectorFieldSampler push_forward(const MovingDomainMap& map, const VectorFieldSampler& field) {
    if (field.frame != Frame::physical)
        throw FrameMismatch("push_forward expects a physical-frame field");
    auto eval = field.eval;
    auto inverse = map.inverse;
    auto jac = map.jac_forward;
    return {[eval, inverse, jac](const Vec2& y, double s) {
                const Vec2 x = inverse(y, s);
                return jac(x, s).apply_left(eval(x, s));  // Gamma~ = Gamma M
            },
            Frame::reference};
}

VectorFieldSampler pull_back(const MovingDomainMap& map, const VectorFieldSampler& field) {
    if (field.frame != Frame::reference)
        throw FrameMismatch("pull_back expects a reference-frame field");
    auto eval = field.eval;
    auto forward = map.forward;
    auto jac = map.jac_forward;
    return {[eval, forward, jac](const Vec2& x, double t) {
                const Vec2 y = forward(x, t);
                return jac(x, t).inverse().apply_left(eval(y, t));  // Gamma = Gamma~ M^{-1}
            },
            Frame::physical};
}

double inverse_identity_residual(const MovingDomainMap& map, int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw ValidationError("inverse_identity_residual needs n_samples >= 1");
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int n = 0; n < n_samples; ++n) {
        const Vec2 y{u01(rng), u01(rng)};
        const double s = map.horizon * u01(rng);
        const Vec2 x = map.inverse(y, s);
        const Mat2 m = map.jac_forward(x, s);
        const Mat2 k = map.jac_inverse(y, s);
        worst = std::max(worst, k.mul(m.transpose()).max_abs_diff(Mat2::identity()));
        const double jinv = m.det();  // J(t)^{-1}
        // cofactor relations (M expressed through K and J)
        worst = std::max(worst, std::abs(m.m[0][0] - jinv * k.m[1][1]));
        worst = std::max(worst, std::abs(m.m[0][1] + jinv * k.m[1][0]));
        worst = std::max(worst, std::abs(m.m[1][0] + jinv * k.m[0][1]));
        worst = std::max(worst, std::abs(m.m[1][1] - jinv * k.m[0][0]));
    }
    return worst;
}

double jacobian_constancy_residual(const MovingDomainMap& map, int n_space, int n_time,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int it = 0; it < n_time; ++it) {
        const double s = map.horizon * u01(rng);
        double lo = 0.0, hi = 0.0;
        for (int n = 0; n < n_space; ++n) {
            const Vec2 y{u01(rng), u01(rng)};
            const double d = map.jac_forward(map.inverse(y, s), s).det();
            if (n == 0) {
                lo = hi = d;
            } else {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

double divergence_residual(const MovingDomainMap& map, const VectorFieldSampler& field, double t,
                           int n_samples, double fd_step, std::uint64_t seed) {
    if (!(fd_step > 0.0)) throw ValidationError("divergence_residual needs fd_step > 0");
    std::mt19937_64 rng(seed);
    const double margin = 0.05;
    double worst = 0.0;
    for (int n = 0; n < n_samples; ++n) {
        const Vec2 y{margin + (1.0 - 2.0 * margin) * u01(rng),
                     margin + (1.0 - 2.0 * margin) * u01(rng)};
        Vec2 p = y;
        if (field.frame == Frame::physical) p = map.inverse(y, t);
        double div = 0.0;
        for (int i = 0; i < 2; ++i) {
            Vec2 pp = p, pm = p;
            pp[static_cast<size_t>(i)] += fd_step;
            pm[static_cast<size_t>(i)] -= fd_step;
            div += (field.eval(pp, t)[static_cast<size_t>(i)] -
                    field.eval(pm, t)[static_cast<size_t>(i)]) /
                   (2.0 * fd_step);
        }
        if (!std::isfinite(div)) throw OutOfDomain("divergence sample left the field domain");
        worst = std::max(worst, std::abs(div));
    }
    return worst;
}

double phi_route_residual(const MovingDomainMap& map, int n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double h = 1e-5;
    double worst = 0.0;
    for (int n = 0; n < n_samples; ++n) {
        const Vec2 y{0.05 + 0.9 * u01(rng), 0.05 + 0.9 * u01(rng)};
        const double s = map.horizon * u01(rng);
        const MetricSample ms = metric_at(map, y, s);
        // dh[i][j][l] = d h_{ij} / dy^l by central differences
        double dh[2][2][2];
        for (int l = 0; l < 2; ++l) {
            Vec2 yp = y, ym = y;
            yp[static_cast<size_t>(l)] += h;
            ym[static_cast<size_t>(l)] -= h;
            const Mat2 hp = metric_at(map, yp, s).h_down;
            const Mat2 hm = metric_at(map, ym, s).h_down;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) dh[i][j][l] = (hp.m[i][j] - hm.m[i][j]) / (2.0 * h);
        }
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double v = 0.0;
                    for (int l = 0; l < 2; ++l)
                        v += 0.5 * ms.h_up.m[k][l] * (dh[i][l][j] + dh[j][l][i] - dh[i][j][l]);
                    worst = std::max(worst, std::abs(v - ms.Phi[k][i][j]));
                }
    }
    return worst;
}

double metric_consistency_residual(const MovingDomainMap& map, int n_samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int n = 0; n < n_samples; ++n) {
        const Vec2 y{u01(rng), u01(rng)};
        const double s = map.horizon * u01(rng);
        const MetricSample ms = metric_at(map, y, s);
        worst = std::max(worst, ms.h_up.mul(ms.h_down).max_abs_diff(Mat2::identity()));
        worst = std::max(worst, std::abs(ms.h_down.det() - ms.J * ms.J));
        worst = std::max(worst, ms.h_up.max_abs_diff(ms.M.transpose().mul(ms.M)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// built-in map families
// ---------------------------------------------------------------------------

MovingDomainMap make_identity_map(double T) {
    MovingDomainMap map;
    map.kind = "identity";
    map.horizon = T;
    map.forward = [](const Vec2& x, double) { return x; };
    map.inverse = [](const Vec2& y, double) { return y; };
    map.jac_forward = [](const Vec2&, double) { return Mat2::identity(); };
    map.jac_inverse = [](const Vec2&, double) { return Mat2::identity(); };
    map.d2x_dydy = [](const Vec2&, double) { return Tensor222::zero(); };
    map.dy_dt = [](const Vec2&, double) { return Vec2{0.0, 0.0}; };
    map.d2x_dsdy = [](const Vec2&, double) { return Mat2::zero(); };
    map.d3x_dydydy = [](const Vec2&, double) { return Tensor2222::zero(); };
    return map;
}

MovingDomainMap make_dilation_map(const std::string& r_expr, double T) {
    auto ex = std::make_shared<expr::Expression>(expr::Expression::parse(r_expr, {"t"}));
    auto r_of = [ex](double t) {
        const expr::Dual d = ex->eval_dual(std::array<expr::Dual, 1>{expr::Dual{t, 1.0}});
        if (!(d.v > 0.0)) throw ValidationError("dilation radius r(t) must stay positive");
        return d;
    };
    MovingDomainMap map;
    map.kind = "dilation";
    map.horizon = T;
    map.forward = [r_of](const Vec2& x, double t) {
        const double r = r_of(t).v;
        return Vec2{x[0] / r, x[1] / r};
    };
    map.inverse = [r_of](const Vec2& y, double s) {
        const double r = r_of(s).v;
        return Vec2{r * y[0], r * y[1]};
    };
    map.jac_forward = [r_of](const Vec2&, double t) {
        const double r = r_of(t).v;
        return Mat2{{{1.0 / r, 0.0}, {0.0, 1.0 / r}}};
    };
    map.jac_inverse = [r_of](const Vec2&, double s) {
        const double r = r_of(s).v;
        return Mat2{{{r, 0.0}, {0.0, r}}};
    };
    map.d2x_dydy = [](const Vec2&, double) { return Tensor222::zero(); };
    map.dy_dt = [r_of](const Vec2& y, double s) {
        const expr::Dual r = r_of(s);
        const double c = -r.d / r.v;
        return Vec2{c * y[0], c * y[1]};
    };
    map.d2x_dsdy = [r_of](const Vec2&, double s) {
        const double rd = r_of(s).d;
        return Mat2{{{rd, 0.0}, {0.0, rd}}};
    };
    map.d3x_dydydy = [](const Vec2&, double) { return Tensor2222::zero(); };
    return map;
}

MovingDomainMap make_rotation_map(const std::string& theta_expr, double T) {
    auto ex = std::make_shared<expr::Expression>(expr::Expression::parse(theta_expr, {"t"}));
    auto th_of = [ex](double t) {
        return ex->eval_dual(std::array<expr::Dual, 1>{expr::Dual{t, 1.0}});
    };
    // x = Q(theta) y with Q = [[c,-s],[s,c]]
    MovingDomainMap map;
    map.kind = "rotation";
    map.horizon = T;
    map.forward = [th_of](const Vec2& x, double t) {
        const double th = th_of(t).v, c = std::cos(th), s = std::sin(th);
        return Vec2{c * x[0] + s * x[1], -s * x[0] + c * x[1]};  // Q^T x
    };
    map.inverse = [th_of](const Vec2& y, double s_) {
        const double th = th_of(s_).v, c = std::cos(th), s = std::sin(th);
        return Vec2{c * y[0] - s * y[1], s * y[0] + c * y[1]};
    };
    map.jac_forward = [th_of](const Vec2&, double t) {
        const double th = th_of(t).v, c = std::cos(th), s = std::sin(th);
        return Mat2{{{c, -s}, {s, c}}};  // M[i][j] = dy^j/dx^i = Q[i][j]
    };
    map.jac_inverse = [th_of](const Vec2&, double s_) {
        const double th = th_of(s_).v, c = std::cos(th), s = std::sin(th);
        return Mat2{{{c, -s}, {s, c}}};
    };
    map.d2x_dydy = [](const Vec2&, double) { return Tensor222::zero(); };
    map.dy_dt = [th_of](const Vec2& y, double s_) {
        const double thd = th_of(s_).d;
        return Vec2{thd * y[1], -thd * y[0]};
    };
    map.d2x_dsdy = [th_of](const Vec2&, double s_) {
        const expr::Dual th = th_of(s_);
        const double c = std::cos(th.v), s = std::sin(th.v);
        return Mat2{{{-s * th.d, -c * th.d}, {c * th.d, -s * th.d}}};  // dQ/ds
    };
    map.d3x_dydydy = [](const Vec2&, double) { return Tensor2222::zero(); };
    return map;
}

MovingDomainMap make_shear_map(const std::string& alpha_expr, double T) {
    auto ex = std::make_shared<expr::Expression>(expr::Expression::parse(alpha_expr, {"t"}));
    auto al_of = [ex](double t) {
        return ex->eval_dual(std::array<expr::Dual, 1>{expr::Dual{t, 1.0}});
    };
    // x1 = y1 + alpha(t) y2, x2 = y2
    MovingDomainMap map;
    map.kind = "shear";
    map.horizon = T;
    map.forward = [al_of](const Vec2& x, double t) {
        const double a = al_of(t).v;
        return Vec2{x[0] - a * x[1], x[1]};
    };
    map.inverse = [al_of](const Vec2& y, double s) {
        const double a = al_of(s).v;
        return Vec2{y[0] + a * y[1], y[1]};
    };
    map.jac_forward = [al_of](const Vec2&, double t) {
        const double a = al_of(t).v;
        return Mat2{{{1.0, 0.0}, {-a, 1.0}}};
    };
    map.jac_inverse = [al_of](const Vec2&, double s) {
        const double a = al_of(s).v;
        return Mat2{{{1.0, a}, {0.0, 1.0}}};
    };
    map.d2x_dydy = [](const Vec2&, double) { return Tensor222::zero(); };
    map.dy_dt = [al_of](const Vec2& y, double s) {
        const double ad = al_of(s).d;
        return Vec2{-ad * y[1], 0.0};
    };
    map.d2x_dsdy = [al_of](const Vec2&, double s) {
        const double ad = al_of(s).d;
        return Mat2{{{0.0, ad}, {0.0, 0.0}}};
    };
    map.d3x_dydydy = [](const Vec2&, double) { return Tensor2222::zero(); };
    return map;
}

MovingDomainMap make_bend_map(double gamma_rate, double T) {
    // x1 = y1 + g(s) sin(pi y2), x2 = y2, with g(s) = gamma_rate * s
    const double gr = gamma_rate;
    MovingDomainMap map;
    map.kind = "bend";
    map.horizon = T;
    map.forward = [gr](const Vec2& x, double t) {
        return Vec2{x[0] - gr * t * std::sin(M_PI * x[1]), x[1]};
    };
    map.inverse = [gr](const Vec2& y, double s) {
        return Vec2{y[0] + gr * s * std::sin(M_PI * y[1]), y[1]};
    };
    map.jac_forward = [gr](const Vec2& x, double t) {
        return Mat2{{{1.0, 0.0}, {-gr * t * M_PI * std::cos(M_PI * x[1]), 1.0}}};
    };
    map.jac_inverse = [gr](const Vec2& y, double s) {
        return Mat2{{{1.0, gr * s * M_PI * std::cos(M_PI * y[1])}, {0.0, 1.0}}};
    };
    map.d2x_dydy = [gr](const Vec2& y, double s) {
        Tensor222 d2 = Tensor222::zero();
        d2.t[0][1][1] = -gr * s * M_PI * M_PI * std::sin(M_PI * y[1]);
        return d2;
    };
    map.dy_dt = [gr](const Vec2& y, double) {
        return Vec2{-gr * std::sin(M_PI * y[1]), 0.0};
    };
    map.d2x_dsdy = [gr](const Vec2& y, double) {
        return Mat2{{{0.0, gr * M_PI * std::cos(M_PI * y[1])}, {0.0, 0.0}}};
    };
    map.d3x_dydydy = [gr](const Vec2& y, double s) {
        Tensor2222 d3 = Tensor2222::zero();
        d3.t[0][1][1][1] = -gr * s * M_PI * M_PI * M_PI * std::cos(M_PI * y[1]);
        return d3;
    };
    return map;
}

MovingDomainMap make_user_map(const std::string& fwd1, const std::string& fwd2,
                              const std::string& inv1, const std::string& inv2, double T,
                              double fd_step) {
    const std::vector<std::string> fvars{"x1", "x2", "t"};
    const std::vector<std::string> ivars{"y1", "y2", "s"};
    auto f1 = std::make_shared<expr::Expression>(expr::Expression::parse(fwd1, fvars));
    auto f2 = std::make_shared<expr::Expression>(expr::Expression::parse(fwd2, fvars));
    auto i1 = std::make_shared<expr::Expression>(expr::Expression::parse(inv1, ivars));
    auto i2 = std::make_shared<expr::Expression>(expr::Expression::parse(inv2, ivars));

    auto fwd = [f1, f2](const Vec2& x, double t) {
        const std::array<double, 3> v{x[0], x[1], t};
        return Vec2{f1->eval(v), f2->eval(v)};
    };
    auto inv = [i1, i2](const Vec2& y, double s) {
        const std::array<double, 3> v{y[0], y[1], s};
        return Vec2{i1->eval(v), i2->eval(v)};
    };

    const double h = fd_step;
    MovingDomainMap map;
    map.kind = "user";
    map.horizon = T;
    map.forward = fwd;
    map.inverse = inv;
    map.jac_forward = [fwd, h](const Vec2& x, double t) {
        Mat2 m;
        for (int i = 0; i < 2; ++i) {
            Vec2 xp = x, xm = x;
            xp[static_cast<size_t>(i)] += h;
            xm[static_cast<size_t>(i)] -= h;
            const Vec2 yp = fwd(xp, t), ym = fwd(xm, t);
            for (int j = 0; j < 2; ++j)
                m.m[i][j] = (yp[static_cast<size_t>(j)] - ym[static_cast<size_t>(j)]) / (2.0 * h);
        }
        return m;
    };
    map.jac_inverse = [inv, h](const Vec2& y, double s) {
        Mat2 k;
        for (int j = 0; j < 2; ++j) {
            Vec2 yp = y, ym = y;
            yp[static_cast<size_t>(j)] += h;
            ym[static_cast<size_t>(j)] -= h;
            const Vec2 xp = inv(yp, s), xm = inv(ym, s);
            for (int i = 0; i < 2; ++i)
                k.m[i][j] = (xp[static_cast<size_t>(i)] - xm[static_cast<size_t>(i)]) / (2.0 * h);
        }
        return k;
    };
    map.d2x_dydy = [inv, h](const Vec2& y, double s) {
        Tensor222 d2;
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j) {
                Vec2 a = y, b = y, c = y, d = y;
                a[static_cast<size_t>(i)] += h;
                a[static_cast<size_t>(j)] += h;
                b[static_cast<size_t>(i)] += h;
                b[static_cast<size_t>(j)] -= h;
                c[static_cast<size_t>(i)] -= h;
                c[static_cast<size_t>(j)] += h;
                d[static_cast<size_t>(i)] -= h;
                d[static_cast<size_t>(j)] -= h;
                const Vec2 xa = inv(a, s), xb = inv(b, s), xc = inv(c, s), xd = inv(d, s);
                for (int l = 0; l < 2; ++l) {
                    const double v = (xa[static_cast<size_t>(l)] - xb[static_cast<size_t>(l)] -
                                      xc[static_cast<size_t>(l)] + xd[static_cast<size_t>(l)]) /
                                     (4.0 * h * h);
                    d2.t[l][i][j] = v;
                    d2.t[l][j][i] = v;
                }
            }
        return d2;
    };
    map.dy_dt = [fwd, inv, h](const Vec2& y, double s) {
        const Vec2 x = inv(y, s);
        const Vec2 yp = fwd(x, s + h), ym = fwd(x, s - h);
        return Vec2{(yp[0] - ym[0]) / (2.0 * h), (yp[1] - ym[1]) / (2.0 * h)};
    };
    map.d2x_dsdy = [inv, h](const Vec2& y, double s) {
        Mat2 r;
        for (int j = 0; j < 2; ++j) {
            Vec2 yp = y, ym = y;
            yp[static_cast<size_t>(j)] += h;
            ym[static_cast<size_t>(j)] -= h;
            const Vec2 a = inv(yp, s + h), b = inv(yp, s - h), c = inv(ym, s + h),
                       d = inv(ym, s - h);
            for (int k = 0; k < 2; ++k)
                r.m[k][j] = (a[static_cast<size_t>(k)] - b[static_cast<size_t>(k)] -
                             c[static_cast<size_t>(k)] + d[static_cast<size_t>(k)]) /
                            (4.0 * h * h);
        }
        return r;
    };
    map.d3x_dydydy = nullptr;  // phi_gradient falls back to finite differences
    return map;
}

}  // namespace movingns
