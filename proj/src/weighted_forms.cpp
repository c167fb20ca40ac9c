#include "movingns/weighted_forms.hpp"

namespace movingns {

MetricTable::MetricTable(const MovingDomainMap& map, const QuadratureRule& quad, double s_,
                         bool with_phi_gradient) {
    s = s_;
    const int n = quad.size();
    pts.resize(static_cast<size_t>(n));
    for (int q = 0; q < n; ++q) {
        const MetricSample ms = metric_at(map, quad.nodes[static_cast<size_t>(q)], s_);
        MetricPoint& p = pts[static_cast<size_t>(q)];
        p.J = ms.J;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                p.h_dn[i][j] = ms.h_down.m[i][j];
                p.h_up[i][j] = ms.h_up.m[i][j];
                p.Gmat[i][j] = ms.M.m[0][i] * ms.d2x_dsdy.m[0][j] +
                               ms.M.m[1][i] * ms.d2x_dsdy.m[1][j];
            }
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) p.Phi[k][i][j] = ms.Phi[k][i][j];
        p.dydt[0] = ms.dy_dt[0];
        p.dydt[1] = ms.dy_dt[1];
        if (with_phi_gradient) {
            phi_gradient(map, quad.nodes[static_cast<size_t>(q)], s_, p.dPhi);
        } else {
            for (auto& a : p.dPhi)
                for (auto& b : a)
                    for (auto& c : b)
                        for (auto& d : c) d = 0.0;
        }
    }
}

double weighted_inner(FieldView u, FieldView v, const MetricTable& metric,
                      const QuadratureRule& quad) {
    const int n = metric.nq();
    double acc = 0.0;
    for (int q = 0; q < n; ++q) {
        const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s += p.h_dn[i][j] * u.v(i, q) * v.v(j, q);
        acc += quad.weights[static_cast<size_t>(q)] * p.J * s;
    }
    return acc;
}

double gradient_inner(CovGradView u, CovGradView v, const MetricTable& metric,
                      const QuadratureRule& quad) {
    const int n = metric.nq();
    double acc = 0.0;
    for (int q = 0; q < n; ++q) {
        const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double t = 0.0;
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) t += p.h_up[k][l] * u.g(i, k, q) * v.g(j, l, q);
                s += p.h_dn[i][j] * t;
            }
        acc += quad.weights[static_cast<size_t>(q)] * p.J * s;
    }
    return acc;
}

}  // namespace movingns
