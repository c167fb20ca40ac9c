#include "movingns/solver.hpp"

#include <cmath>
#include <random>

#include "movingns/errors.hpp"

namespace movingns {

namespace {

// uniform in (0,1] from a raw 64-bit draw; the 1-u form keeps log(u) finite
double u01_closed(std::mt19937_64& rng) { return 1.0 - (rng() >> 11) * 0x1.0p-53; }

}  // namespace

BrownianPath sample_brownian(std::uint64_t seed, const TimeGrid& grid) {
    BrownianPath path;
    path.seed = seed;
    path.dt = grid.dt();
    const int n = grid.n_steps;
    path.increments.resize(static_cast<size_t>(n));
    path.cumulative.resize(static_cast<size_t>(n) + 1);
    path.cumulative[0] = 0.0;

    std::mt19937_64 rng(seed);
    const double sd = std::sqrt(path.dt);
    double spare = 0.0;
    bool has_spare = false;
    for (int i = 0; i < n; ++i) {
        double z;
        if (has_spare) {
            z = spare;
            has_spare = false;
        } else {
            const double u1 = u01_closed(rng);
            const double u2 = u01_closed(rng);
            const double r = std::sqrt(-2.0 * std::log(u1));
            z = r * std::cos(2.0 * M_PI * u2);
            spare = r * std::sin(2.0 * M_PI * u2);
            has_spare = true;
        }
        path.increments[static_cast<size_t>(i)] = sd * z;
        path.cumulative[static_cast<size_t>(i) + 1] =
            path.cumulative[static_cast<size_t>(i)] + sd * z;
    }
    return path;
}

BrownianPath coarsen(const BrownianPath& path) {
    const int n = static_cast<int>(path.increments.size());
    if (n % 2 != 0) throw ValidationError("coarsen needs an even number of increments");
    BrownianPath out;
    out.seed = path.seed;
    out.dt = 2.0 * path.dt;
    out.increments.resize(static_cast<size_t>(n) / 2);
    out.cumulative.resize(static_cast<size_t>(n) / 2 + 1);
    out.cumulative[0] = 0.0;
    for (int i = 0; i < n / 2; ++i) {
        out.increments[static_cast<size_t>(i)] =
            path.increments[static_cast<size_t>(2 * i)] +
            path.increments[static_cast<size_t>(2 * i) + 1];
        out.cumulative[static_cast<size_t>(i) + 1] =
            out.cumulative[static_cast<size_t>(i)] + out.increments[static_cast<size_t>(i)];
    }
    return out;
}

std::vector<double> em_step(std::span<const double> g, const GalerkinTensors& tensors, double dW,
                            double dt) {
    if (!(dt > 0.0)) throw ValidationError("em_step needs dt > 0");
    const int m = tensors.m;
    std::vector<double> out(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) {
        double drift = tensors.f_vec[static_cast<size_t>(j)];
        const double* lin = tensors.a_lin.data() + static_cast<size_t>(j) * m;
        for (int k = 0; k < m; ++k) drift -= lin[k] * g[static_cast<size_t>(k)];
        const double* tri = tensors.a_tri.data() + static_cast<size_t>(j) * m * m;
        for (int k = 0; k < m; ++k) {
            const double gk = g[static_cast<size_t>(k)];
            if (gk == 0.0) continue;
            const double* row = tri + static_cast<size_t>(k) * m;
            double acc = 0.0;
            for (int l = 0; l < m; ++l) acc += row[l] * g[static_cast<size_t>(l)];
            drift -= gk * acc;
        }
        const double v = g[static_cast<size_t>(j)] + drift * dt +
                         tensors.sigma_vec[static_cast<size_t>(j)] * dW;
        if (!std::isfinite(v))
            throw NonFinite("coefficient " + std::to_string(j + 1) + " left the finite range", -1);
        out[static_cast<size_t>(j)] = v;
    }
    return out;
}

namespace {

VectorFieldSampler make_data_sampler(const std::string& kind, double amplitude, int mode_index,
                                     StreamFamily family) {
    if (kind == "zero")
        return {[](const Vec2&, double) { return Vec2{0.0, 0.0}; }, Frame::reference};
    if (kind == "constant")
        return {[amplitude](const Vec2&, double) { return Vec2{amplitude, amplitude}; },
                Frame::reference};
    // single raw stream element
    const StreamElement el = raw_stream_basis(mode_index, family).back();
    return {[el, amplitude](const Vec2& y, double) { return amplitude * el.value(y); },
            Frame::reference};
}

}  // namespace

Scenario Scenario::build(const RunConfig& cfg, ExecPolicy policy) {
    Scenario sc;
    sc.cfg = cfg;

    if (cfg.map_kind == "identity")
        sc.map = make_identity_map(cfg.solver_T);
    else if (cfg.map_kind == "dilation")
        sc.map = make_dilation_map(cfg.map_r_expr, cfg.solver_T);
    else if (cfg.map_kind == "rotation")
        sc.map = make_rotation_map(cfg.map_theta_expr, cfg.solver_T);
    else if (cfg.map_kind == "shear")
        sc.map = make_shear_map(cfg.map_alpha_expr, cfg.solver_T);
    else
        sc.map = make_user_map(cfg.map_user_y1, cfg.map_user_y2, cfg.map_user_x1, cfg.map_user_x2,
                               cfg.solver_T);
    sc.map.det_floor = cfg.map_det_floor;

    sc.grid = TimeGrid{cfg.solver_T, cfg.n_time()};
    sc.quad = QuadratureRule::gauss_legendre(cfg.quad_order);
    const StreamFamily family =
        cfg.basis_family == "mixed" ? StreamFamily::mixed : StreamFamily::standard;
    sc.table = std::make_shared<StreamTable>(raw_stream_basis(cfg.basis_m, family), sc.quad);

    sc.ortho = orthonormalize_series(*sc.table, sc.map, sc.grid, sc.quad, policy);
    basis_time_derivative(sc.ortho);

    sc.force = make_data_sampler(cfg.force_kind, cfg.force_amplitude, cfg.force_mode_index, family);
    sc.noise = make_data_sampler(cfg.noise_kind, cfg.noise_amplitude, cfg.noise_mode_index, family);

    const int n = sc.grid.n_nodes();
    sc.tensors.resize(static_cast<size_t>(n));
    // per-node assembly is independent; each call runs its kernels serially
    // here and the nodes are distributed instead
    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n; ++i) {
            const BasisSnapshot snap = materialize_snapshot(sc.ortho, i, *sc.table, sc.map, sc.quad);
            sc.tensors[static_cast<size_t>(i)] = assemble_tensors(
                snap, *sc.table, sc.map, sc.force, sc.noise, sc.quad, ExecPolicy::serial);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const BasisSnapshot snap = materialize_snapshot(sc.ortho, i, *sc.table, sc.map, sc.quad);
            sc.tensors[static_cast<size_t>(i)] = assemble_tensors(
                snap, *sc.table, sc.map, sc.force, sc.noise, sc.quad, ExecPolicy::serial);
        }
    }

    // initial data: project u0~ onto the s=0 basis
    const int m = cfg.basis_m;
    sc.g0.assign(static_cast<size_t>(m), 0.0);
    VectorFieldSampler ic{[](const Vec2&, double) { return Vec2{0.0, 0.0}; }, Frame::reference};
    if (cfg.ic_kind == "mode") {
        const StreamElement el = raw_stream_basis(cfg.ic_mode_index, family).back();
        ic.eval = [el](const Vec2& y, double) { return el.value(y); };
    } else if (cfg.ic_kind == "stream") {
        const auto elems = raw_stream_basis(static_cast<int>(cfg.ic_coeffs.size()), family);
        const auto coeffs = cfg.ic_coeffs;
        ic.eval = [elems, coeffs](const Vec2& y, double) {
            Vec2 acc{0.0, 0.0};
            for (size_t a = 0; a < elems.size(); ++a) acc = acc + coeffs[a] * elems[a].value(y);
            return acc;
        };
    }
    if (cfg.ic_kind != "zero") {
        const MetricTable metric(sc.map, sc.quad, 0.0, false);
        const BasisSnapshot snap0 = materialize_snapshot(sc.ortho, 0, *sc.table, sc.map, sc.quad);
        const int nq = sc.quad.size();
        std::vector<double> ics(static_cast<size_t>(2) * nq);
        for (int q = 0; q < nq; ++q) {
            const Vec2 v = ic.eval(sc.quad.nodes[static_cast<size_t>(q)], 0.0);
            ics[static_cast<size_t>(q)] = v[0];
            ics[static_cast<size_t>(nq) + q] = v[1];
        }
        const FieldView icv{ics.data(), nq};
        double proj_sq = 0.0;
        for (int j = 0; j < m; ++j) {
            sc.g0[static_cast<size_t>(j)] = weighted_inner(icv, snap0.field(j), metric, sc.quad);
            proj_sq += sc.g0[static_cast<size_t>(j)] * sc.g0[static_cast<size_t>(j)];
        }
        sc.ic_norm_sq = weighted_inner(icv, icv, metric, sc.quad);
        sc.discarded_ic_norm = std::sqrt(std::max(sc.ic_norm_sq - proj_sq, 0.0));
    }
    return sc;
}

CoefficientTrajectory solve(const Scenario& sc, std::uint64_t seed) {
    return solve_with_path(sc, sample_brownian(seed, sc.grid), sc.g0);
}

CoefficientTrajectory solve_with_path(const Scenario& sc, const BrownianPath& path,
                                      std::vector<double> g0) {
    const int n = sc.grid.n_steps;
    if (static_cast<int>(path.increments.size()) != n)
        throw ValidationError("Brownian path does not match the time grid");

    CoefficientTrajectory traj;
    traj.m = sc.cfg.basis_m;
    traj.grid = sc.grid;
    traj.path = path;
    traj.g0 = g0;
    traj.discarded_ic_norm = sc.discarded_ic_norm;
    traj.g.reserve(static_cast<size_t>(n) + 1);
    traj.g.push_back(std::move(g0));

    double e0 = 0.0;
    for (const double v : traj.g[0]) e0 += v * v;
    double budget = e0;
    for (int i = 0; i <= n; ++i) {
        double fs = 0.0, ss = 0.0;
        for (int j = 0; j < traj.m; ++j) {
            fs += sc.tensors[static_cast<size_t>(i)].f_vec[static_cast<size_t>(j)] *
                  sc.tensors[static_cast<size_t>(i)].f_vec[static_cast<size_t>(j)];
            ss += sc.tensors[static_cast<size_t>(i)].sigma_vec[static_cast<size_t>(j)] *
                  sc.tensors[static_cast<size_t>(i)].sigma_vec[static_cast<size_t>(j)];
        }
        budget = std::max(budget, e0 + sc.grid.T * (fs + ss));
    }
    const double guard = sc.cfg.solver_blowup_factor * (budget + 1.0);

    for (int step = 0; step < n; ++step) {
        std::vector<double> next;
        try {
            next = em_step(traj.g.back(), sc.tensors[static_cast<size_t>(step)],
                           path.increments[static_cast<size_t>(step)], sc.grid.dt());
        } catch (const NonFinite& e) {
            throw NonFinite(std::string(e.what()) + " at time node " + std::to_string(step + 1),
                            step + 1);
        }
        double e = 0.0;
        for (const double v : next) e += v * v;
        traj.max_abs_g = std::max(traj.max_abs_g, std::sqrt(e));
        if (e > guard)
            throw NonFinite("energy " + std::to_string(e) + " tripped the blow-up guard at node " +
                                std::to_string(step + 1),
                            step + 1);
        traj.g.push_back(std::move(next));
    }
    return traj;
}

std::vector<double> energy_series(const CoefficientTrajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.g.size());
    for (const auto& row : traj.g) {
        double e = 0.0;
        for (const double v : row) e += v * v;
        out.push_back(e);
    }
    return out;
}

std::vector<double> grad_energy_series(const Scenario& sc, const CoefficientTrajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.g.size());
    for (size_t node = 0; node < traj.g.size(); ++node) {
        const GalerkinTensors& t = sc.tensors[node];
        const auto& g = traj.g[node];
        double e = 0.0;
        for (int j = 0; j < traj.m; ++j)
            for (int k = 0; k < traj.m; ++k)
                e += g[static_cast<size_t>(j)] * t.gram(j, k) * g[static_cast<size_t>(k)];
        out.push_back(e);
    }
    return out;
}

namespace {

Vec2 eval_reference_basis_sum(const Scenario& sc, std::span<const double> g, int node,
                              const Vec2& y) {
    const auto& R = sc.ortho.R[static_cast<size_t>(node)];
    const int m = sc.ortho.m;
    const auto& elems = sc.table->elements();
    // u~ = sum_j g_j w_j = sum_a (sum_j g_j R[j][a]) e_a
    Vec2 acc{0.0, 0.0};
    for (int a = 0; a < m; ++a) {
        double c = 0.0;
        for (int j = a; j < m; ++j)
            c += g[static_cast<size_t>(j)] * R[static_cast<size_t>(j) * m + a];
        if (c != 0.0) acc = acc + c * elems[static_cast<size_t>(a)].value(y);
    }
    return acc;
}

}  // namespace

Vec2 reconstruct_at(const Scenario& sc, std::span<const double> g, int node, const Vec2& x) {
    const double t = sc.grid.node(node);
    const Vec2 y = sc.map.forward(x, t);
    if (y[0] < 0.0 || y[0] > 1.0 || y[1] < 0.0 || y[1] > 1.0)
        throw OutOfDomain("point lies outside D(t)");
    const Vec2 ref = eval_reference_basis_sum(sc, g, node, y);
    return sc.map.jac_forward(x, t).inverse().apply_left(ref);
}

FieldSnapshot reconstruct(const Scenario& sc, const CoefficientTrajectory& traj, int node,
                          int n_pts) {
    const double t = sc.grid.node(node);
    // bounding box of D(t) from the mapped boundary of the reference square
    double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
    const int nb = 64;
    for (int i = 0; i <= nb; ++i) {
        const double u = static_cast<double>(i) / nb;
        const Vec2 pts[4] = {{u, 0.0}, {u, 1.0}, {0.0, u}, {1.0, u}};
        for (const Vec2& p : pts) {
            const Vec2 x = sc.map.inverse(p, t);
            for (int d = 0; d < 2; ++d) {
                lo[d] = std::min(lo[d], x[static_cast<size_t>(d)]);
                hi[d] = std::max(hi[d], x[static_cast<size_t>(d)]);
            }
        }
    }

    FieldSnapshot snap;
    snap.t = t;
    snap.x1.reserve(static_cast<size_t>(n_pts) * n_pts);
    for (int a = 0; a < n_pts; ++a)
        for (int b = 0; b < n_pts; ++b) {
            const Vec2 x{lo[0] + (hi[0] - lo[0]) * a / (n_pts - 1.0),
                         lo[1] + (hi[1] - lo[1]) * b / (n_pts - 1.0)};
            snap.x1.push_back(x[0]);
            snap.x2.push_back(x[1]);
            const Vec2 y = sc.map.forward(x, t);
            if (y[0] < 0.0 || y[0] > 1.0 || y[1] < 0.0 || y[1] > 1.0) {
                snap.inside.push_back(0);
                snap.u1.push_back(0.0);
                snap.u2.push_back(0.0);
            } else {
                const Vec2 u = sc.map.jac_forward(x, t).inverse().apply_left(
                    eval_reference_basis_sum(sc, traj.g[static_cast<size_t>(node)], node, y));
                snap.inside.push_back(1);
                snap.u1.push_back(u[0]);
                snap.u2.push_back(u[1]);
            }
        }
    return snap;
}

}  // namespace movingns
