#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace movingns {

/// Parsed and validated run configuration. Every field has a documented
/// default; parse_config rejects unknown keys outright so typos cannot
/// silently fall back to defaults.
struct RunConfig {
    // map.*
    std::string map_kind = "identity";  // identity | dilation | rotation | shear | user
    std::string map_r_expr = "1+t";
    std::string map_theta_expr = "t";
    std::string map_alpha_expr = "0.3*t";
    std::string map_user_y1, map_user_y2;  // forward components, vars x1,x2,t
    std::string map_user_x1, map_user_x2;  // inverse components, vars y1,y2,s
    double map_det_floor = 1e-8;

    // discretization
    int basis_m = 4;
    std::string basis_family = "standard";  // standard | mixed
    int quad_order = 24;
    double solver_T = 0.5;
    double solver_dt = 1e-3;
    int grid_n_time = 0;  // 0: derived as round(T/dt)
    std::uint64_t solver_seed = 1;
    double solver_blowup_factor = 1e6;

    // data
    std::string ic_kind = "zero";  // zero | mode | stream
    int ic_mode_index = 1;
    std::vector<double> ic_coeffs;
    std::string force_kind = "zero";  // zero | constant | mode
    double force_amplitude = 1.0;
    int force_mode_index = 1;
    std::string noise_kind = "zero";  // zero | constant | mode
    double noise_amplitude = 1.0;
    int noise_mode_index = 1;

    // diagnostics
    int mc_n_paths = 200;
    std::vector<int> mc_m_list{4, 8, 16};
    std::vector<double> conv_dt_list{4e-3, 2e-3, 1e-3};
    int conv_n_seeds = 100;

    // output
    int output_field_grid = 33;
    int output_field_snapshots = 2;
    bool output_dump_tensors = false;

    int n_time() const;  // resolved grid size
};

/// Line-oriented `key = value` text; '#' starts a comment. Unknown keys are
/// hard errors (ParseError with line number); invariant violations raise
/// ValidationError naming the offending constraint.
RunConfig parse_config(const std::string& text);

RunConfig parse_config_file(const std::string& path);

/// Canonical key=value echo of the effective configuration, in fixed key
/// order with full-precision numbers; this is what lands in the manifest.
std::string config_echo(const RunConfig& cfg);

}  // namespace movingns
