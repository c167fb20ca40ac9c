#include "movingns/basis.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "movingns/errors.hpp"

namespace movingns {

namespace {

// Gram matrix of the raw stream basis under <.,.>_s
std::vector<double> raw_gram(const StreamTable& table, const MetricTable& metric,
                             const QuadratureRule& quad) {
    const int m = table.m(), nq = table.nq();
    std::vector<double> gram(static_cast<size_t>(m) * m);
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            double acc = 0.0;
            for (int q = 0; q < nq; ++q) {
                const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
                double s = 0.0;
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j)
                        s += p.h_dn[i][j] * table.val(a, i, q) * table.val(b, j, q);
                acc += quad.weights[static_cast<size_t>(q)] * p.J * s;
            }
            gram[static_cast<size_t>(a) * m + b] = acc;
            gram[static_cast<size_t>(b) * m + a] = acc;
        }
    return gram;
}

// Modified Gram-Schmidt on coefficient rows under the Gram metric, with one
// re-orthogonalization pass. Rows of R map raw elements to the orthonormal
// family; the diagonal stays positive.
std::vector<double> mgs_coefficients(const std::vector<double>& gram, int m,
                                     double pivot_threshold) {
    std::vector<double> R(static_cast<size_t>(m) * m, 0.0);
    auto gdot = [&](const double* a, const double* b) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            if (a[i] == 0.0) continue;
            double row = 0.0;
            for (int j = 0; j < m; ++j) row += gram[static_cast<size_t>(i) * m + j] * b[j];
            acc += a[i] * row;
        }
        return acc;
    };
    std::vector<double> v(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        std::fill(v.begin(), v.end(), 0.0);
        v[static_cast<size_t>(j)] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (int i = 0; i < j; ++i) {
                const double* ci = R.data() + static_cast<size_t>(i) * m;
                const double proj = gdot(v.data(), ci);
                for (int k = 0; k <= i; ++k) v[static_cast<size_t>(k)] -= proj * ci[k];
            }
        const double nrm2 = gdot(v.data(), v.data());
        if (!(nrm2 > pivot_threshold * pivot_threshold))
            throw DegenerateBasis("Gram-Schmidt pivot " + std::to_string(std::sqrt(std::max(nrm2, 0.0))) +
                                  " below threshold at mode " + std::to_string(j + 1));
        const double inv = 1.0 / std::sqrt(nrm2);
        for (int k = 0; k <= j; ++k)
            R[static_cast<size_t>(j) * m + k] = v[static_cast<size_t>(k)] * inv;
    }
    return R;
}

void sample_fields(BasisSnapshot& snap, const StreamTable& table, const MetricTable& metric) {
    const int m = snap.m, nq = snap.nq;
    snap.value.assign(static_cast<size_t>(m) * 2 * nq, 0.0);
    snap.cov_grad.assign(static_cast<size_t>(m) * 4 * nq, 0.0);
    for (int j = 0; j < m; ++j) {
        const double* row = snap.R.data() + static_cast<size_t>(j) * m;
        for (int a = 0; a <= j; ++a) {
            const double c = row[a];
            if (c == 0.0) continue;
            for (int i = 0; i < 2; ++i)
                for (int q = 0; q < nq; ++q)
                    snap.value[(static_cast<size_t>(j) * 2 + i) * nq + q] +=
                        c * table.val(a, i, q);
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k)
                    for (int q = 0; q < nq; ++q)
                        snap.cov_grad[((static_cast<size_t>(j) * 2 + i) * 2 + k) * nq + q] +=
                            c * table.grad(a, i, k, q);
        }
        // covariant correction: nabla_k w^i = d_k w^i + Phi^i_{k l} w^l
        for (int q = 0; q < nq; ++q) {
            const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
            for (int i = 0; i < 2; ++i)
                for (int k = 0; k < 2; ++k) {
                    double corr = 0.0;
                    for (int l = 0; l < 2; ++l)
                        corr += p.Phi[i][k][l] *
                                snap.value[(static_cast<size_t>(j) * 2 + l) * nq + q];
                    snap.cov_grad[((static_cast<size_t>(j) * 2 + i) * 2 + k) * nq + q] += corr;
                }
        }
    }
}

}  // namespace

BasisSnapshot orthonormalize(const StreamTable& table, const MovingDomainMap& map, double s,
                             const QuadratureRule& quad, double pivot_threshold) {
    const MetricTable metric(map, quad, s, false);
    BasisSnapshot snap;
    snap.s = s;
    snap.m = table.m();
    snap.nq = table.nq();
    snap.R = mgs_coefficients(raw_gram(table, metric, quad), snap.m, pivot_threshold);
    sample_fields(snap, table, metric);
    return snap;
}

OrthoSeries orthonormalize_series(const StreamTable& table, const MovingDomainMap& map,
                                  const TimeGrid& grid, const QuadratureRule& quad,
                                  ExecPolicy policy, double pivot_threshold) {
    OrthoSeries out;
    out.grid = grid;
    out.m = table.m();
    const int n = grid.n_nodes();
    out.R.resize(static_cast<size_t>(n));

    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            const MetricTable metric(map, quad, grid.node(i), false);
            out.R[static_cast<size_t>(i)] =
                mgs_coefficients(raw_gram(table, metric, quad), out.m, pivot_threshold);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const MetricTable metric(map, quad, grid.node(i), false);
            out.R[static_cast<size_t>(i)] =
                mgs_coefficients(raw_gram(table, metric, quad), out.m, pivot_threshold);
        }
    }
    return out;
}

void basis_time_derivative(OrthoSeries& series) {
    const int n = series.grid.n_nodes();
    if (n < 3) throw ValidationError("time derivative of R needs at least 3 grid nodes");
    const double dt = series.grid.dt();
    const size_t mm = static_cast<size_t>(series.m) * series.m;
    series.Rdot.assign(static_cast<size_t>(n), std::vector<double>(mm, 0.0));
    for (int i = 0; i < n; ++i) {
        std::vector<double>& d = series.Rdot[static_cast<size_t>(i)];
        if (i == 0) {
            for (size_t k = 0; k < mm; ++k)
                d[k] = (-3.0 * series.R[0][k] + 4.0 * series.R[1][k] - series.R[2][k]) /
                       (2.0 * dt);
        } else if (i == n - 1) {
            for (size_t k = 0; k < mm; ++k)
                d[k] = (3.0 * series.R[static_cast<size_t>(i)][k] -
                        4.0 * series.R[static_cast<size_t>(i - 1)][k] +
                        series.R[static_cast<size_t>(i - 2)][k]) /
                       (2.0 * dt);
        } else {
            for (size_t k = 0; k < mm; ++k)
                d[k] = (series.R[static_cast<size_t>(i + 1)][k] -
                        series.R[static_cast<size_t>(i - 1)][k]) /
                       (2.0 * dt);
        }
    }
}

BasisSnapshot materialize_snapshot(const OrthoSeries& series, int node, const StreamTable& table,
                                   const MovingDomainMap& map, const QuadratureRule& quad) {
    const MetricTable metric(map, quad, series.grid.node(node), false);
    BasisSnapshot snap;
    snap.s = series.grid.node(node);
    snap.m = series.m;
    snap.nq = table.nq();
    snap.R = series.R[static_cast<size_t>(node)];
    sample_fields(snap, table, metric);
    if (!series.Rdot.empty()) {
        const std::vector<double>& rd = series.Rdot[static_cast<size_t>(node)];
        snap.wdot.assign(static_cast<size_t>(snap.m) * 2 * snap.nq, 0.0);
        for (int j = 0; j < snap.m; ++j)
            for (int a = 0; a < snap.m; ++a) {
                const double c = rd[static_cast<size_t>(j) * snap.m + a];
                if (c == 0.0) continue;
                for (int i = 0; i < 2; ++i)
                    for (int q = 0; q < snap.nq; ++q)
                        snap.wdot[(static_cast<size_t>(j) * 2 + i) * snap.nq + q] +=
                            c * table.val(a, i, q);
            }
    }
    return snap;
}

std::vector<double> antisymmetry_residual(const BasisSnapshot& snap, const MovingDomainMap& map,
                                          const QuadratureRule& quad) {
    if (snap.wdot.empty())
        throw ValidationError("antisymmetry residual needs the time-derivative samples");
    const MetricTable metric(map, quad, snap.s, false);
    const int m = snap.m, nq = snap.nq;

    // G w_j sampled at quadrature nodes
    std::vector<double> gw(static_cast<size_t>(m) * 2 * nq, 0.0);
    for (int j = 0; j < m; ++j) {
        const CovGradView cg = snap.cov(j);
        const FieldView w = snap.field(j);
        for (int q = 0; q < nq; ++q) {
            const MetricPoint& p = metric.pts[static_cast<size_t>(q)];
            for (int i = 0; i < 2; ++i) {
                double v = p.dydt[0] * cg.g(i, 0, q) + p.dydt[1] * cg.g(i, 1, q);
                v += p.Gmat[i][0] * w.v(0, q) + p.Gmat[i][1] * w.v(1, q);
                gw[(static_cast<size_t>(j) * 2 + i) * nq + q] = v;
            }
        }
    }
    auto gw_view = [&](int j) {
        return FieldView{gw.data() + static_cast<size_t>(j) * 2 * nq, nq};
    };

    std::vector<double> res(static_cast<size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double v = weighted_inner(snap.wdot_field(i), snap.field(j), metric, quad) +
                             weighted_inner(gw_view(i), snap.field(j), metric, quad) +
                             weighted_inner(snap.wdot_field(j), snap.field(i), metric, quad) +
                             weighted_inner(gw_view(j), snap.field(i), metric, quad);
            res[static_cast<size_t>(i) * m + j] = v;
        }
    return res;
}

namespace {
constexpr char kCacheMagic[8] = {'M', 'N', 'S', 'B', 'A', 'S', '0', '1'};
}

void save_ortho_series(const OrthoSeries& series, int quad_order, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw ValidationError("cannot open cache file for writing: " + path);
    std::fwrite(kCacheMagic, 1, 8, f);
    const std::int64_t m = series.m, n = series.grid.n_steps, qo = quad_order;
    const double T = series.grid.T;
    std::fwrite(&m, sizeof m, 1, f);
    std::fwrite(&n, sizeof n, 1, f);
    std::fwrite(&qo, sizeof qo, 1, f);
    std::fwrite(&T, sizeof T, 1, f);
    const std::int64_t has_dot = series.Rdot.empty() ? 0 : 1;
    std::fwrite(&has_dot, sizeof has_dot, 1, f);
    for (const auto& r : series.R) std::fwrite(r.data(), sizeof(double), r.size(), f);
    for (const auto& r : series.Rdot) std::fwrite(r.data(), sizeof(double), r.size(), f);
    std::fclose(f);
}

bool load_ortho_series(const std::string& path, int expect_m, const TimeGrid& expect_grid,
                       int expect_quad_order, OrthoSeries& out) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) return false;
    char magic[8];
    std::int64_t m = 0, n = 0, qo = 0, has_dot = 0;
    double T = 0.0;
    bool ok = std::fread(magic, 1, 8, f) == 8 && std::memcmp(magic, kCacheMagic, 8) == 0 &&
              std::fread(&m, sizeof m, 1, f) == 1 && std::fread(&n, sizeof n, 1, f) == 1 &&
              std::fread(&qo, sizeof qo, 1, f) == 1 && std::fread(&T, sizeof T, 1, f) == 1 &&
              std::fread(&has_dot, sizeof has_dot, 1, f) == 1;
    ok = ok && m == expect_m && n == expect_grid.n_steps && qo == expect_quad_order &&
         T == expect_grid.T;
    if (ok) {
        out.m = expect_m;
        out.grid = expect_grid;
        const size_t mm = static_cast<size_t>(expect_m) * expect_m;
        out.R.assign(static_cast<size_t>(n + 1), std::vector<double>(mm));
        for (auto& r : out.R) ok = ok && std::fread(r.data(), sizeof(double), mm, f) == mm;
        if (has_dot) {
            out.Rdot.assign(static_cast<size_t>(n + 1), std::vector<double>(mm));
            for (auto& r : out.Rdot)
                ok = ok && std::fread(r.data(), sizeof(double), mm, f) == mm;
        } else {
            out.Rdot.clear();
        }
    }
    std::fclose(f);
    return ok;
}

}  // namespace movingns
