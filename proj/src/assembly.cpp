#include "movingns/assembly.hpp"

#include <cmath>

#include "movingns/errors.hpp"

namespace movingns {

namespace {

// plain (non-covariant) first and second derivatives of the orthonormal
// fields, mixed from the raw table through R(s)
struct PlainDerivatives {
    int m, nq;
    std::vector<double> grad;  // [j][i][k][q]
    std::vector<double> hess;  // [j][i][k][l][q]

    PlainDerivatives(const BasisSnapshot& snap, const StreamTable& table)
        : m(snap.m), nq(snap.nq) {
        grad.assign(static_cast<size_t>(m) * 4 * nq, 0.0);
        hess.assign(static_cast<size_t>(m) * 8 * nq, 0.0);
        for (int j = 0; j < m; ++j)
            for (int a = 0; a <= j; ++a) {
                const double c = snap.R[static_cast<size_t>(j) * m + a];
                if (c == 0.0) continue;
                for (int i = 0; i < 2; ++i)
                    for (int k = 0; k < 2; ++k) {
                        double* g = grad.data() + ((static_cast<size_t>(j) * 2 + i) * 2 + k) * nq;
                        for (int q = 0; q < nq; ++q) g[q] += c * table.grad(a, i, k, q);
                        for (int l = 0; l < 2; ++l) {
                            double* h = hess.data() +
                                        (((static_cast<size_t>(j) * 2 + i) * 2 + k) * 2 + l) * nq;
                            for (int q = 0; q < nq; ++q) h[q] += c * table.hess(a, i, k, l, q);
                        }
                    }
            }
    }

    double g(int j, int i, int k, int q) const {
        return grad[((static_cast<size_t>(j) * 2 + i) * 2 + k) * nq + q];
    }
    double h(int j, int i, int k, int l, int q) const {
        return hess[(((static_cast<size_t>(j) * 2 + i) * 2 + k) * 2 + l) * nq + q];
    }
};

// F w^i and G w^i at one node for one basis field
inline void apply_fg_at(const MetricPoint& p, const double w[2], const double pg[2][2],
                        const double ph[2][2][2], const double cg[2][2], double f_out[2],
                        double g_out[2]) {
    // nabla_j nabla_k w^i = d_j(nabla_k w^i) + Phi^i_{jl} nabla_k w^l
    //                       - Phi^l_{jk} nabla_l w^i
    // d_j(nabla_k w^i) = d_j d_k w^i + dPhi^i_{kl,j} w^l + Phi^i_{kl} d_j w^l
    for (int i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                double d = ph[i][k][j];
                for (int l = 0; l < 2; ++l) {
                    d += p.dPhi[i][k][l][j] * w[l] + p.Phi[i][k][l] * pg[l][j];
                    d += p.Phi[i][j][l] * cg[l][k] - p.Phi[l][j][k] * cg[i][l];
                }
                acc += p.h_up[j][k] * d;
            }
        f_out[i] = acc;
        g_out[i] = p.dydt[0] * cg[i][0] + p.dydt[1] * cg[i][1] + p.Gmat[i][0] * w[0] +
                   p.Gmat[i][1] * w[1];
    }
}

void apply_range(const BasisSnapshot& snap, const PlainDerivatives& pd, const MetricTable& metric,
                 OperatorSamples& out, int j) {
    const int nq = snap.nq;
    const FieldView wv = snap.field(j);
    const CovGradView cv = snap.cov(j);
    for (int q = 0; q < nq; ++q) {
        const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
        const double w[2] = {wv.v(0, q), wv.v(1, q)};
        const double pg[2][2] = {{pd.g(j, 0, 0, q), pd.g(j, 0, 1, q)},
                                 {pd.g(j, 1, 0, q), pd.g(j, 1, 1, q)}};
        const double ph[2][2][2] = {
            {{pd.h(j, 0, 0, 0, q), pd.h(j, 0, 0, 1, q)}, {pd.h(j, 0, 1, 0, q), pd.h(j, 0, 1, 1, q)}},
            {{pd.h(j, 1, 0, 0, q), pd.h(j, 1, 0, 1, q)}, {pd.h(j, 1, 1, 0, q), pd.h(j, 1, 1, 1, q)}}};
        const double cg[2][2] = {{cv.g(0, 0, q), cv.g(0, 1, q)}, {cv.g(1, 0, q), cv.g(1, 1, q)}};
        double fo[2], go[2];
        apply_fg_at(p, w, pg, ph, cg, fo, go);
        for (int i = 0; i < 2; ++i) {
            out.F[(static_cast<size_t>(j) * 2 + i) * nq + q] = fo[i];
            out.G[(static_cast<size_t>(j) * 2 + i) * nq + q] = go[i];
        }
    }
}

}  // namespace

OperatorSamples covariant_apply(const BasisSnapshot& snap, const StreamTable& table,
                                const MetricTable& metric, ExecPolicy policy) {
    const PlainDerivatives pd(snap, table);
    OperatorSamples out;
    out.m = snap.m;
    out.nq = snap.nq;
    out.F.resize(static_cast<size_t>(snap.m) * 2 * snap.nq);
    out.G.resize(static_cast<size_t>(snap.m) * 2 * snap.nq);
    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < snap.m; ++j) apply_range(snap, pd, metric, out, j);
    } else {
        for (int j = 0; j < snap.m; ++j) apply_range(snap, pd, metric, out, j);
    }
    return out;
}

GalerkinTensors assemble_tensors(const BasisSnapshot& snap, const StreamTable& table,
                                 const MovingDomainMap& map, const VectorFieldSampler& force,
                                 const VectorFieldSampler& noise, const QuadratureRule& quad,
                                 ExecPolicy policy) {
    if (snap.wdot.empty())
        throw ValidationError("assemble_tensors needs basis time-derivative samples");
    if (force.frame != Frame::reference || noise.frame != Frame::reference)
        throw FrameMismatch("force and noise samplers must be reference-frame fields");

    const int m = snap.m, nq = snap.nq;
    const MetricTable metric(map, quad, snap.s, true);
    const OperatorSamples ops = covariant_apply(snap, table, metric, policy);

    GalerkinTensors out;
    out.s = snap.s;
    out.m = m;
    out.a_lin.resize(static_cast<size_t>(m) * m);
    out.grad_gram.resize(static_cast<size_t>(m) * m);
    out.a_tri.resize(static_cast<size_t>(m) * m * m);
    out.f_vec.resize(static_cast<size_t>(m));
    out.sigma_vec.resize(static_cast<size_t>(m));

    // sampled force / noise
    std::vector<double> fs(static_cast<size_t>(2) * nq), ss(static_cast<size_t>(2) * nq);
    for (int q = 0; q < nq; ++q) {
        const Vec2 fv = force.eval(quad.nodes[static_cast<size_t>(q)], snap.s);
        const Vec2 sv = noise.eval(quad.nodes[static_cast<size_t>(q)], snap.s);
        fs[static_cast<size_t>(q)] = fv[0];
        fs[static_cast<size_t>(nq) + q] = fv[1];
        ss[static_cast<size_t>(q)] = sv[0];
        ss[static_cast<size_t>(nq) + q] = sv[1];
    }
    const FieldView f_view{fs.data(), nq}, s_view{ss.data(), nq};

    // hw[j][a][q] = w_q J sum_b h_{ab} w_j^b  (test-function side, premultiplied)
    std::vector<double> hw(static_cast<size_t>(m) * 2 * nq);
    for (int j = 0; j < m; ++j) {
        const FieldView wv = snap.field(j);
        for (int q = 0; q < nq; ++q) {
            const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
            const double wj = quad.weights[static_cast<size_t>(q)] * p.J;
            for (int a = 0; a < 2; ++a)
                hw[(static_cast<size_t>(j) * 2 + a) * nq + q] =
                    wj * (p.h_dn[a][0] * wv.v(0, q) + p.h_dn[a][1] * wv.v(1, q));
        }
    }

    // convective fields N(w_k, w_l)^i = sum_a w_k^a nabla_a w_l^i
    std::vector<double> conv(static_cast<size_t>(m) * m * 2 * nq);
    auto fill_conv = [&](int k) {
        const FieldView wk = snap.field(k);
        for (int l = 0; l < m; ++l) {
            const CovGradView cl = snap.cov(l);
            double* dst = conv.data() + ((static_cast<size_t>(k) * m + l) * 2) * nq;
            for (int i = 0; i < 2; ++i)
                for (int q = 0; q < nq; ++q)
                    dst[static_cast<size_t>(i) * nq + q] =
                        wk.v(0, q) * cl.g(i, 0, q) + wk.v(1, q) * cl.g(i, 1, q);
        }
    };
    auto row_jk = [&](int j) {
        for (int k = 0; k < m; ++k) {
            out.a_lin[static_cast<size_t>(j) * m + k] =
                weighted_inner(snap.wdot_field(k), snap.field(j), metric, quad) -
                weighted_inner(ops.f_field(k), snap.field(j), metric, quad) +
                weighted_inner(ops.g_field(k), snap.field(j), metric, quad);
            out.grad_gram[static_cast<size_t>(j) * m + k] =
                gradient_inner(snap.cov(j), snap.cov(k), metric, quad);
        }
    };
    auto tri_row = [&](int j) {
        const double* hwj = hw.data() + static_cast<size_t>(j) * 2 * nq;
        for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) {
                const double* nk = conv.data() + ((static_cast<size_t>(k) * m + l) * 2) * nq;
                double acc = 0.0;
                for (size_t t = 0; t < static_cast<size_t>(2) * nq; ++t) acc += hwj[t] * nk[t];
                out.a_tri[(static_cast<size_t>(j) * m + k) * m + l] = acc;
            }
    };

    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(static)
        for (int k = 0; k < m; ++k) fill_conv(k);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < m; ++j) row_jk(j);
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j < m; ++j) tri_row(j);
    } else {
        for (int k = 0; k < m; ++k) fill_conv(k);
        for (int j = 0; j < m; ++j) row_jk(j);
        for (int j = 0; j < m; ++j) tri_row(j);
    }

    for (int j = 0; j < m; ++j) {
        out.f_vec[static_cast<size_t>(j)] = weighted_inner(f_view, snap.field(j), metric, quad);
        out.sigma_vec[static_cast<size_t>(j)] =
            weighted_inner(s_view, snap.field(j), metric, quad);
    }
    return out;
}

double trilinear_b(const MovingDomainMap& map, const VectorFieldSampler& u,
                   const VectorFieldSampler& v, const VectorFieldSampler& w, double t,
                   const QuadratureRule& quad, double fd_step) {
    if (u.frame != Frame::physical || v.frame != Frame::physical || w.frame != Frame::physical)
        throw FrameMismatch("trilinear_b works on physical-frame fields");
    double acc = 0.0;
    for (int q = 0; q < quad.size(); ++q) {
        const Vec2& y = quad.nodes[static_cast<size_t>(q)];
        const Vec2 x = map.inverse(y, t);
        const double jac = map.jac_inverse(y, t).det();  // dx = J dy
        const Vec2 uv = u.eval(x, t);
        const Vec2 wv = w.eval(x, t);
        double term = 0.0;
        for (int i = 0; i < 2; ++i) {
            Vec2 xp = x, xm = x;
            xp[static_cast<size_t>(i)] += fd_step;
            xm[static_cast<size_t>(i)] -= fd_step;
            const Vec2 vp = v.eval(xp, t), vm = v.eval(xm, t);
            for (int j = 0; j < 2; ++j)
                term += uv[static_cast<size_t>(i)] *
                        (vp[static_cast<size_t>(j)] - vm[static_cast<size_t>(j)]) /
                        (2.0 * fd_step) * wv[static_cast<size_t>(j)];
        }
        acc += quad.weights[static_cast<size_t>(q)] * jac * term;
    }
    return acc;
}

}  // namespace movingns
