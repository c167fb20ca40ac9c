#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "movingns/assembly.hpp"
#include "movingns/config.hpp"

namespace movingns {

/// Discrete Brownian path on a uniform grid. Increments are N(0, dt),
/// generated from mt19937_64 with an explicit Box-Muller transform so the
/// stream is fully determined by the seed (no library-defined distribution
/// in the loop).
struct BrownianPath {
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::vector<double> increments;  // n_steps entries
    std::vector<double> cumulative;  // n_steps+1 entries, W(0)=0
};

BrownianPath sample_brownian(std::uint64_t seed, const TimeGrid& grid);

/// Halves the resolution by summing adjacent increments; the coupled coarse
/// path of a refinement study. Requires an even step count.
BrownianPath coarsen(const BrownianPath& path);

/// One explicit Euler-Maruyama step of the coefficient system:
/// g' = g + [-a_lin g - a_tri(g,g) + f] dt + sigma dW.
/// Throws NonFinite if any output entry leaves the representable range.
std::vector<double> em_step(std::span<const double> g, const GalerkinTensors& tensors, double dW,
                            double dt);

struct CoefficientTrajectory {
    int m = 0;
    TimeGrid grid;
    std::vector<std::vector<double>> g;  // n_nodes rows of m coefficients
    BrownianPath path;
    std::vector<double> g0;
    double discarded_ic_norm = 0.0;  // ||u0 - projection||_0, reported not dropped
    double max_abs_g = 0.0;
};

/// Fully assembled time-dependent problem: everything solve() needs, built
/// once from a config and shared (immutably) across seeds and threads.
struct Scenario {
    RunConfig cfg;
    MovingDomainMap map;
    TimeGrid grid;
    QuadratureRule quad;
    std::shared_ptr<StreamTable> table;
    OrthoSeries ortho;
    std::vector<GalerkinTensors> tensors;  // one per grid node
    VectorFieldSampler force, noise;       // reference-frame samplers
    std::vector<double> g0;
    double ic_norm_sq = 0.0;         // |u0~|_0^2 by quadrature
    double discarded_ic_norm = 0.0;  // sqrt(max(|u0|^2 - |proj|^2, 0))

    static Scenario build(const RunConfig& cfg, ExecPolicy policy = ExecPolicy::openmp);
};

CoefficientTrajectory solve(const Scenario& sc, std::uint64_t seed);

/// Same drift/noise data but a caller-supplied Brownian path and initial
/// coefficients; the building block for coupled-path studies.
CoefficientTrajectory solve_with_path(const Scenario& sc, const BrownianPath& path,
                                      std::vector<double> g0);

/// |u_m(t_n)|^2 = sum_j g_j(t_n)^2 per node.
std::vector<double> energy_series(const CoefficientTrajectory& traj);

/// |grad_h u_m(t_n)|^2 = g^T S(t_n) g per node.
std::vector<double> grad_energy_series(const Scenario& sc, const CoefficientTrajectory& traj);

struct FieldSnapshot {
    double t = 0.0;
    std::vector<double> x1, x2, u1, u2;
    std::vector<int> inside;
};

/// Physical velocity u_m(x, t_n) = sum_j g_j w_j(L(x,t)) M^{-1} on an
/// n_pts x n_pts grid over the bounding box of D(t_n); points outside the
/// domain are flagged and carry zeros.
FieldSnapshot reconstruct(const Scenario& sc, const CoefficientTrajectory& traj, int node,
                          int n_pts);

/// Point evaluation of the reconstructed physical field; throws OutOfDomain
/// for x outside D(t_n).
Vec2 reconstruct_at(const Scenario& sc, std::span<const double> g, int node, const Vec2& x);

}  // namespace movingns
