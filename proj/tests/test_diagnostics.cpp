#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "movingns/diagnostics.hpp"

using namespace movingns;

namespace {

RunConfig diag_cfg() {
    RunConfig cfg;
    cfg.map_kind = "dilation";
    cfg.basis_m = 3;
    cfg.quad_order = 16;
    cfg.solver_T = 0.25;
    cfg.solver_dt = 1e-3;
    cfg.ic_kind = "mode";
    cfg.ic_mode_index = 1;
    cfg.force_kind = "mode";
    cfg.force_mode_index = 1;
    cfg.force_amplitude = 0.5;
    cfg.noise_kind = "mode";
    cfg.noise_mode_index = 2;
    cfg.noise_amplitude = 0.3;
    return cfg;
}

std::vector<std::uint64_t> seed_range(int n) {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < n; ++i) s.push_back(static_cast<std::uint64_t>(i) + 1);
    return s;
}

double metric_value(const DiagnosticReport& rep, const std::string& name) {
    for (const auto& m : rep.metrics)
        if (m.name == name) return m.value;
    FAIL("metric not found: ", name);
    return 0.0;
}

}  // namespace

TEST_CASE("energy budget residual decays at first order") {
    const auto rep = energy_budget(diag_cfg(), seed_range(60), {5e-3, 2.5e-3, 1.25e-3});
    CHECK(rep.pass);
    CHECK(metric_value(rep, "fitted_order") >= 0.9);
}

TEST_CASE("deterministic energy budget includes the monotonicity gate") {
    RunConfig cfg = diag_cfg();
    cfg.map_kind = "identity";
    cfg.noise_kind = "zero";
    cfg.force_kind = "zero";
    const auto rep = energy_budget(cfg, seed_range(1), {4e-3, 2e-3, 1e-3});
    CHECK(rep.pass);
    CHECK(metric_value(rep, "max_step_energy_increase") <= 1e-12);
    CHECK(metric_value(rep, "fitted_order") >= 0.9);
}

TEST_CASE("twin runs with identical data coincide bitwise") {
    const auto rep = uniqueness_gap(diag_cfg(), 5, 0.0);
    CHECK(rep.pass);
    CHECK(metric_value(rep, "bitwise_identical") == 1.0);
}

TEST_CASE("perturbed twin stays inside the Gronwall envelope and scales quadratically") {
    const auto rep = uniqueness_gap(diag_cfg(), 5, 1e-6);
    CHECK(rep.pass);
    CHECK(metric_value(rep, "max_envelope_ratio") <= 1.0);
    const auto rep_half = uniqueness_gap(diag_cfg(), 5, 5e-7);
    const double ratio =
        metric_value(rep, "max_gap_sq") / metric_value(rep_half, "max_gap_sq");
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));  // linearized regime
}

TEST_CASE("finite-rank inequality: monotone N and exact projections") {
    RunConfig cfg = diag_cfg();
    cfg.quad_order = 24;
    const auto rep = finite_rank_inequality(cfg, 0.1, 12, {0.1, 0.01, 0.002}, 300, 42);
    CHECK(rep.pass);
    const double n_01 = metric_value(rep, "N_eps_0.1");
    const double n_001 = metric_value(rep, "N_eps_0.01");
    CHECK(n_001 >= n_01);
    CHECK(metric_value(rep, "monotone_in_eps") == 1.0);
}

TEST_CASE("nested Galerkin solutions approach each other") {
    RunConfig cfg = diag_cfg();
    cfg.solver_dt = 2e-3;
    cfg.ic_kind = "stream";  // data spread across the first six modes
    cfg.ic_coeffs = {1.0, 0.6, -0.4, 0.3, -0.2, 0.15};
    const auto rep = galerkin_cauchy(cfg, {2, 4, 8}, seed_range(5));
    CHECK(rep.pass);
    CHECK(metric_value(rep, "strictly_decreasing") == 1.0);
}

TEST_CASE("strong order is near one for additive noise") {
    RunConfig cfg = diag_cfg();
    cfg.basis_m = 2;
    const auto rep = strong_rate(cfg, {5e-3, 2.5e-3, 1.25e-3}, seed_range(30));
    CHECK(rep.pass);
    CHECK(metric_value(rep, "fitted_order") >= 0.7);
}

TEST_CASE("uniform bound is flat across mode counts") {
    RunConfig cfg = diag_cfg();
    cfg.solver_dt = 2e-3;
    const auto rep = uniform_bound_mc(cfg, {2, 4, 8}, 40, 2.0);
    CHECK(rep.pass);
    CHECK(metric_value(rep, "spread_factor") <= 2.0);
}

TEST_CASE("reports serialize with one row per metric") {
    const auto rep = uniqueness_gap(diag_cfg(), 5, 0.0);
    write_report_csv(rep, "report_test.csv");
    std::ifstream in("report_test.csv");
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(rep.metrics.size()) + 1);
    std::remove("report_test.csv");
}

TEST_CASE("uniform bound estimates do not grow under step refinement") {
    RunConfig coarse = diag_cfg();
    coarse.solver_dt = 5e-3;
    RunConfig fine = diag_cfg();
    fine.solver_dt = 1.25e-3;
    auto bound_of = [](const RunConfig& cfg) {
        const auto rep = uniform_bound_mc(cfg, {4}, 30, 10.0);
        for (const auto& m : rep.metrics)
            if (m.name == "bound_m_4") return m.value;
        return -1.0;
    };
    const double b_coarse = bound_of(coarse);
    const double b_fine = bound_of(fine);
    CHECK(b_fine <= 1.05 * b_coarse);  // refinement must not inflate the bound
}
