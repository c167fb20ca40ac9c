#pragma once

#include <vector>

#include "movingns/geometry.hpp"
#include "movingns/quadrature.hpp"

namespace movingns {

/// Everything the assembly kernels need from the map at one quadrature node.
struct MetricPoint {
    double J;
    double h_dn[2][2];
    double h_up[2][2];
    double Phi[2][2][2];
    double dPhi[2][2][2][2];
    double dydt[2];
    double Gmat[2][2];  // Gmat[i][j] = sum_k (dy^i/dx^k) d2x^k/ds dy^j
};

/// Metric data sampled at all quadrature nodes for one time node.
struct MetricTable {
    double s = 0.0;
    std::vector<MetricPoint> pts;

    MetricTable() = default;
    MetricTable(const MovingDomainMap& map, const QuadratureRule& quad, double s,
                bool with_phi_gradient);

    int nq() const { return static_cast<int>(pts.size()); }
};

/// Strided view of a sampled vector field: component i at node q.
struct FieldView {
    const double* data = nullptr;
    int nq = 0;
    double v(int i, int q) const { return data[static_cast<size_t>(i) * nq + q]; }
};

/// View of sampled covariant derivatives nabla_k u^i.
struct CovGradView {
    const double* data = nullptr;
    int nq = 0;
    double g(int i, int k, int q) const {
        return data[(static_cast<size_t>(i) * 2 + k) * nq + q];
    }
};

/// <u,v>_s = sum_q w_q h_{ij} u^i v^j J. Symmetric, bilinear; by the change
/// of variables it equals the physical L^2 pairing over D(s).
double weighted_inner(FieldView u, FieldView v, const MetricTable& metric,
                      const QuadratureRule& quad);

/// <grad_h u, grad_h v>_s = sum_q w_q h_{ij} h^{kl} (nabla_k u^i)(nabla_l v^j) J.
double gradient_inner(CovGradView u, CovGradView v, const MetricTable& metric,
                      const QuadratureRule& quad);

}  // namespace movingns
