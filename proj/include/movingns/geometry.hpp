#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "movingns/types.hpp"

namespace movingns {

/// Level-preserving diffeomorphism L between the moving physical domain
/// D(t) and the fixed reference square (0,1)^2, with the derivative data
/// needed by the transformed operators. Conventions:
///   forward      (x,t) -> y          inverse      (y,s) -> x
///   jac_forward  M[i][j] = dy^j/dx^i
///   jac_inverse  K[i][j] = dx^i/dy^j
///   d2x_dydy     [l][i][j] = d2 x^l / dy^i dy^j
///   dy_dt        d y^j / dt at fixed x, expressed at (y,s)
///   d2x_dsdy     [k][j] = d2 x^k / ds dy^j
///   d3x_dydydy   [l][i][j][a]; optional, used for analytic Christoffel
///                gradients (null falls back to finite differences)
/// Requirements: det M > det_floor everywhere and det M spatially constant
/// (J depends on time only). All evaluators must be pure; samplers are
/// called concurrently from many threads.
struct MovingDomainMap {
    std::function<Vec2(const Vec2&, double)> forward;
    std::function<Vec2(const Vec2&, double)> inverse;
    std::function<Mat2(const Vec2&, double)> jac_forward;
    std::function<Mat2(const Vec2&, double)> jac_inverse;
    std::function<Tensor222(const Vec2&, double)> d2x_dydy;
    std::function<Vec2(const Vec2&, double)> dy_dt;
    std::function<Mat2(const Vec2&, double)> d2x_dsdy;
    std::function<Tensor2222(const Vec2&, double)> d3x_dydydy;  // may be null
    double horizon = 1.0;
    double det_floor = 1e-8;
    std::string kind = "user";
};

/// Pointwise metric data at one reference point (y,s).
struct MetricSample {
    Mat2 M, K;
    double J = 1.0;            // 1 / det M
    Mat2 h_up, h_down;         // h^{ij} = (M^T M)_{ij}, h_{ij} = (K^T K)_{ij}
    double Phi[2][2][2];       // Phi[k][i][j], symmetric in (i,j)
    Vec2 dy_dt;
    Mat2 d2x_dsdy;
    Vec2 y;
    double s = 0.0;
};

enum class Frame { physical, reference };

struct VectorFieldSampler {
    std::function<Vec2(const Vec2&, double)> eval;
    Frame frame = Frame::reference;
};

MetricSample metric_at(const MovingDomainMap& map, const Vec2& y, double s);

/// d Phi^k_{ij} / dy^a as dphi[k][i][j][a]; analytic when the map provides
/// third derivatives, otherwise central differences of Phi.
void phi_gradient(const MovingDomainMap& map, const Vec2& y, double s,
                  double dphi[2][2][2][2], double fd_step = 1e-5);

VectorFieldSampler push_forward(const MovingDomainMap& map, const VectorFieldSampler& field);
VectorFieldSampler pull_back(const MovingDomainMap& map, const VectorFieldSampler& field);

/// Max over random samples of ||K M^T - I|| and the four cofactor
/// relations tying M to K through J.
double inverse_identity_residual(const MovingDomainMap& map, int n_samples, std::uint64_t seed);

/// Max spatial variation of det M across random points, maximized over
/// random times; condition (A1) demands this be zero.
double jacobian_constancy_residual(const MovingDomainMap& map, int n_space, int n_time,
                                   std::uint64_t seed);

/// Max |central-difference divergence| of the field over random interior
/// points of its domain at time t.
double divergence_residual(const MovingDomainMap& map, const VectorFieldSampler& field, double t,
                           int n_samples, double fd_step, std::uint64_t seed);

/// Christoffel symbols two ways: from the map Hessian versus from finite
/// differences of the metric tensor h. Returns the max discrepancy.
double phi_route_residual(const MovingDomainMap& map, int n_samples, std::uint64_t seed);

/// Max over random samples of the metric-tensor identities
/// h_up h_down = I, det h_down = J^2, h_up = M^T M.
double metric_consistency_residual(const MovingDomainMap& map, int n_samples, std::uint64_t seed);

MovingDomainMap make_identity_map(double T);
MovingDomainMap make_dilation_map(const std::string& r_expr, double T);
MovingDomainMap make_rotation_map(const std::string& theta_expr, double T);
MovingDomainMap make_shear_map(const std::string& alpha_expr, double T);

/// Nonlinear shear x1 = y1 + gamma_rate*s*sin(pi y2); det M == 1 but the
/// metric varies in space, so the Christoffel machinery is exercised for
/// real. Closed-form derivatives throughout; used by the verify battery.
MovingDomainMap make_bend_map(double gamma_rate, double T);

/// User map from expression strings: forward components in (x1,x2,t),
/// inverse components in (y1,y2,s). All derivatives fall back to central
/// finite differences of the given step; expect ~1e-9 accuracy at best,
/// not the 1e-12 the analytic built-ins reach.
MovingDomainMap make_user_map(const std::string& fwd1, const std::string& fwd2,
                              const std::string& inv1, const std::string& inv2, double T,
                              double fd_step = 1e-5);

}  // namespace movingns
