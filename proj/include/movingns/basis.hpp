#pragma once

#include <string>
#include <vector>

#include "movingns/exec.hpp"
#include "movingns/stream_basis.hpp"
#include "movingns/weighted_forms.hpp"

namespace movingns {

struct TimeGrid {
    double T = 1.0;
    int n_steps = 2;

    double dt() const { return T / n_steps; }
    double node(int n) const { return T * n / n_steps; }
    int n_nodes() const { return n_steps + 1; }
};

/// Orthonormalized divergence-free basis at one time node, sampled at the
/// quadrature nodes. R is the lower-triangular Gram-Schmidt coefficient
/// matrix with positive diagonal: w_j = sum_{k<=j} R[j][k] e_k. wdot holds
/// samples of w'_j once the time-derivative pass has run (empty before).
struct BasisSnapshot {
    double s = 0.0;
    int m = 0;
    int nq = 0;
    std::vector<double> R;         // m*m row-major, lower triangular
    std::vector<double> value;     // [j][i][q]
    std::vector<double> cov_grad;  // [j][i][k][q], nabla_k w^i
    std::vector<double> wdot;      // [j][i][q]

    FieldView field(int j) const { return {value.data() + static_cast<size_t>(j) * 2 * nq, nq}; }
    CovGradView cov(int j) const {
        return {cov_grad.data() + static_cast<size_t>(j) * 4 * nq, nq};
    }
    FieldView wdot_field(int j) const {
        return {wdot.data() + static_cast<size_t>(j) * 2 * nq, nq};
    }
};

/// Lightweight per-grid record of the orthonormalization: just R(s) and its
/// discrete time derivative. Full snapshots are materialized on demand.
struct OrthoSeries {
    TimeGrid grid;
    int m = 0;
    std::vector<std::vector<double>> R;     // per node
    std::vector<std::vector<double>> Rdot;  // filled by basis_time_derivative
};

/// Gram-Schmidt of the raw stream basis under <.,.>_s. Modified GS in
/// coefficient space with one re-orthogonalization pass and the positive
/// diagonal convention, so R(s) is the smooth-in-s branch.
BasisSnapshot orthonormalize(const StreamTable& table, const MovingDomainMap& map, double s,
                             const QuadratureRule& quad, double pivot_threshold = 1e-10);

OrthoSeries orthonormalize_series(const StreamTable& table, const MovingDomainMap& map,
                                  const TimeGrid& grid, const QuadratureRule& quad,
                                  ExecPolicy policy = ExecPolicy::openmp,
                                  double pivot_threshold = 1e-10);

/// Central differences of R(s) on interior nodes, one-sided second-order at
/// the endpoints. The raw fields are time-independent, so w' = R'(s) e.
void basis_time_derivative(OrthoSeries& series);

/// Snapshot at a grid node, with wdot when Rdot is available.
BasisSnapshot materialize_snapshot(const OrthoSeries& series, int node, const StreamTable& table,
                                   const MovingDomainMap& map, const QuadratureRule& quad);

/// Entry (i,j) of the identity <w'_i + G w_i, w_j>_s + <w'_j + G w_j, w_i>_s,
/// which vanishes for the exact orthonormal family. Requires wdot.
std::vector<double> antisymmetry_residual(const BasisSnapshot& snap, const MovingDomainMap& map,
                                          const QuadratureRule& quad);

/// Flat binary cache of an OrthoSeries (versioned header: magic, m, grid,
/// quadrature order). Returns false on any mismatch instead of guessing.
void save_ortho_series(const OrthoSeries& series, int quad_order, const std::string& path);
bool load_ortho_series(const std::string& path, int expect_m, const TimeGrid& expect_grid,
                       int expect_quad_order, OrthoSeries& out);

}  // namespace movingns
