#pragma once

#include <vector>

#include "movingns/basis.hpp"
#include "movingns/exec.hpp"
#include "movingns/geometry.hpp"

namespace movingns {

/// Coefficient tensors of the projected system at one time node:
///   a_lin[j][k]    = <w'_k, w_j>_s - <F w_k, w_j>_s + <G w_k, w_j>_s
///   a_tri[j][k][l] = <N(w_k, w_l), w_j>_s
///   f_vec[j]       = <f~, w_j>_s,  sigma_vec[j] = <sigma~, w_j>_s
/// grad_gram is the gradient Gram matrix S_jk = <grad_h w_j, grad_h w_k>_s,
/// kept for the energy ledger (it is the dissipation quadratic form).
struct GalerkinTensors {
    double s = 0.0;
    int m = 0;
    std::vector<double> a_lin;      // m*m
    std::vector<double> a_tri;      // m*m*m, index (j*m+k)*m+l
    std::vector<double> f_vec;      // m
    std::vector<double> sigma_vec;  // m
    std::vector<double> grad_gram;  // m*m

    double lin(int j, int k) const { return a_lin[static_cast<size_t>(j) * m + k]; }
    double tri(int j, int k, int l) const {
        return a_tri[(static_cast<size_t>(j) * m + k) * m + l];
    }
    double gram(int j, int k) const { return grad_gram[static_cast<size_t>(j) * m + k]; }
};

/// Sampled action of the transformed operators on every basis field:
/// F w_j (covariant Laplacian) and G w_j (frame-motion terms), at the
/// quadrature nodes. Layout [j][i][q].
struct OperatorSamples {
    int m = 0, nq = 0;
    std::vector<double> F, G;

    FieldView f_field(int j) const { return {F.data() + static_cast<size_t>(j) * 2 * nq, nq}; }
    FieldView g_field(int j) const { return {G.data() + static_cast<size_t>(j) * 2 * nq, nq}; }
};

/// Applies F and G to all basis fields. Second derivatives of the basis come
/// analytically from the stream table through R(s); metric gradients come
/// from the map (analytic third derivatives when available).
OperatorSamples covariant_apply(const BasisSnapshot& snap, const StreamTable& table,
                                const MetricTable& metric, ExecPolicy policy = ExecPolicy::openmp);

GalerkinTensors assemble_tensors(const BasisSnapshot& snap, const StreamTable& table,
                                 const MovingDomainMap& map, const VectorFieldSampler& force,
                                 const VectorFieldSampler& noise, const QuadratureRule& quad,
                                 ExecPolicy policy = ExecPolicy::openmp);

/// Physical-frame trilinear form b_t(u,v,w) = sum_ij int u^i d_i v^j w^j dx
/// over D(t). Quadrature nodes are reference nodes mapped through L^{-1}
/// with the constant Jacobian J(t); the gradient of v is taken by central
/// differences in x, so this route shares no operator machinery with the
/// transformed-frame assembly.
double trilinear_b(const MovingDomainMap& map, const VectorFieldSampler& u,
                   const VectorFieldSampler& v, const VectorFieldSampler& w, double t,
                   const QuadratureRule& quad, double fd_step = 1e-5);

}  // namespace movingns
