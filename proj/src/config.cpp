#include "movingns/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "movingns/errors.hpp"

namespace movingns {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, int line) {
    try {
        size_t used = 0;
        const double d = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return d;
    } catch (...) {
    }
    throw ParseError("expected a number, got '" + v + "'", line);
}

long to_int(const std::string& v, int line) {
    try {
        size_t used = 0;
        const long d = std::stol(v, &used);
        if (trim(v.substr(used)).empty()) return d;
    } catch (...) {
    }
    throw ParseError("expected an integer, got '" + v + "'", line);
}

bool to_bool(const std::string& v, int line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("expected a boolean, got '" + v + "'", line);
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, int line, F item) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(item(tok, line));
    }
    if (out.empty()) throw ParseError("expected a comma-separated list, got '" + v + "'", line);
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

int RunConfig::n_time() const {
    if (grid_n_time > 0) return grid_n_time;
    return static_cast<int>(std::llround(solver_T / solver_dt));
}

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::function<void(const std::string&, int)>> keys;

    keys["map.kind"] = [&](const std::string& v, int) { cfg.map_kind = v; };
    keys["map.r_expr"] = [&](const std::string& v, int) { cfg.map_r_expr = v; };
    keys["map.theta_expr"] = [&](const std::string& v, int) { cfg.map_theta_expr = v; };
    keys["map.alpha_expr"] = [&](const std::string& v, int) { cfg.map_alpha_expr = v; };
    keys["map.user.y1_expr"] = [&](const std::string& v, int) { cfg.map_user_y1 = v; };
    keys["map.user.y2_expr"] = [&](const std::string& v, int) { cfg.map_user_y2 = v; };
    keys["map.user.x1_expr"] = [&](const std::string& v, int) { cfg.map_user_x1 = v; };
    keys["map.user.x2_expr"] = [&](const std::string& v, int) { cfg.map_user_x2 = v; };
    keys["map.det_floor"] = [&](const std::string& v, int l) { cfg.map_det_floor = to_double(v, l); };
    keys["basis.family"] = [&](const std::string& v, int) { cfg.basis_family = v; };
    keys["basis.m"] = [&](const std::string& v, int l) { cfg.basis_m = static_cast<int>(to_int(v, l)); };
    keys["quad.order"] = [&](const std::string& v, int l) { cfg.quad_order = static_cast<int>(to_int(v, l)); };
    keys["grid.n_time"] = [&](const std::string& v, int l) { cfg.grid_n_time = static_cast<int>(to_int(v, l)); };
    keys["solver.T"] = [&](const std::string& v, int l) { cfg.solver_T = to_double(v, l); };
    keys["solver.dt"] = [&](const std::string& v, int l) { cfg.solver_dt = to_double(v, l); };
    keys["solver.seed"] = [&](const std::string& v, int l) { cfg.solver_seed = static_cast<std::uint64_t>(to_int(v, l)); };
    keys["solver.blowup_factor"] = [&](const std::string& v, int l) { cfg.solver_blowup_factor = to_double(v, l); };
    keys["ic.kind"] = [&](const std::string& v, int) { cfg.ic_kind = v; };
    keys["ic.mode_index"] = [&](const std::string& v, int l) { cfg.ic_mode_index = static_cast<int>(to_int(v, l)); };
    keys["ic.coeffs"] = [&](const std::string& v, int l) { cfg.ic_coeffs = to_list<double>(v, l, to_double); };
    keys["force.kind"] = [&](const std::string& v, int) { cfg.force_kind = v; };
    keys["force.amplitude"] = [&](const std::string& v, int l) { cfg.force_amplitude = to_double(v, l); };
    keys["force.mode_index"] = [&](const std::string& v, int l) { cfg.force_mode_index = static_cast<int>(to_int(v, l)); };
    keys["noise.kind"] = [&](const std::string& v, int) { cfg.noise_kind = v; };
    keys["noise.amplitude"] = [&](const std::string& v, int l) { cfg.noise_amplitude = to_double(v, l); };
    keys["noise.mode_index"] = [&](const std::string& v, int l) { cfg.noise_mode_index = static_cast<int>(to_int(v, l)); };
    keys["mc.n_paths"] = [&](const std::string& v, int l) { cfg.mc_n_paths = static_cast<int>(to_int(v, l)); };
    keys["mc.m_list"] = [&](const std::string& v, int l) {
        cfg.mc_m_list = to_list<int>(v, l, [](const std::string& s, int ln) { return static_cast<int>(to_int(s, ln)); });
    };
    keys["conv.dt_list"] = [&](const std::string& v, int l) { cfg.conv_dt_list = to_list<double>(v, l, to_double); };
    keys["conv.n_seeds"] = [&](const std::string& v, int l) { cfg.conv_n_seeds = static_cast<int>(to_int(v, l)); };
    keys["output.field_grid"] = [&](const std::string& v, int l) { cfg.output_field_grid = static_cast<int>(to_int(v, l)); };
    keys["output.field_snapshots"] = [&](const std::string& v, int l) { cfg.output_field_snapshots = static_cast<int>(to_int(v, l)); };
    keys["output.dump_tensors"] = [&](const std::string& v, int l) { cfg.output_dump_tensors = to_bool(v, l); };

    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got '" + line + "'", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end()) throw ParseError("unknown key '" + key + "'", line_no);
        it->second(value, line_no);
    }

    // validation
    if (cfg.basis_m < 1) throw ValidationError("basis.m must be >= 1");
    if (cfg.basis_family != "standard" && cfg.basis_family != "mixed")
        throw ValidationError("basis.family must be standard or mixed");
    if (cfg.quad_order < 8) throw ValidationError("quad.order must be >= 8");
    if (!(cfg.solver_T > 0.0)) throw ValidationError("solver.T must be positive");
    if (!(cfg.solver_dt > 0.0)) throw ValidationError("solver.dt must be positive");
    if (cfg.grid_n_time > 0) {
        if (std::abs(cfg.grid_n_time * cfg.solver_dt - cfg.solver_T) > 1e-9 * cfg.solver_T)
            throw ValidationError("grid.n_time * solver.dt must equal solver.T");
    } else {
        const double n = cfg.solver_T / cfg.solver_dt;
        if (std::abs(n - std::llround(n)) > 1e-9 * std::max(1.0, n))
            throw ValidationError("solver.T must be an integer multiple of solver.dt");
        if (std::llround(n) < 2) throw ValidationError("the time grid needs at least 2 steps");
    }
    const bool known_map = cfg.map_kind == "identity" || cfg.map_kind == "dilation" ||
                           cfg.map_kind == "rotation" || cfg.map_kind == "shear" ||
                           cfg.map_kind == "user";
    if (!known_map) throw ValidationError("map.kind '" + cfg.map_kind + "' is not a built-in");
    if (cfg.map_kind == "user" &&
        (cfg.map_user_y1.empty() || cfg.map_user_y2.empty() || cfg.map_user_x1.empty() ||
         cfg.map_user_x2.empty()))
        throw ValidationError("user maps need all four map.user.*_expr keys");
    auto known3 = [](const std::string& k, const char* what) {
        if (k != "zero" && k != "constant" && k != "mode")
            throw ValidationError(std::string(what) + " kind '" + k + "' is not a built-in");
    };
    known3(cfg.force_kind, "force");
    known3(cfg.noise_kind, "noise");
    if (cfg.ic_kind != "zero" && cfg.ic_kind != "mode" && cfg.ic_kind != "stream")
        throw ValidationError("ic kind '" + cfg.ic_kind + "' is not a built-in");
    if (cfg.ic_kind == "mode" && cfg.ic_mode_index < 1)
        throw ValidationError("ic.mode_index must be >= 1");
    if (cfg.mc_n_paths < 1) throw ValidationError("mc.n_paths must be >= 1");
    if (cfg.output_field_grid < 2) throw ValidationError("output.field_grid must be >= 2");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_echo(const RunConfig& c) {
    std::ostringstream o;
    o << "map.kind = " << c.map_kind << "\n";
    if (c.map_kind == "dilation") o << "map.r_expr = " << c.map_r_expr << "\n";
    if (c.map_kind == "rotation") o << "map.theta_expr = " << c.map_theta_expr << "\n";
    if (c.map_kind == "shear") o << "map.alpha_expr = " << c.map_alpha_expr << "\n";
    if (c.map_kind == "user") {
        o << "map.user.y1_expr = " << c.map_user_y1 << "\n";
        o << "map.user.y2_expr = " << c.map_user_y2 << "\n";
        o << "map.user.x1_expr = " << c.map_user_x1 << "\n";
        o << "map.user.x2_expr = " << c.map_user_x2 << "\n";
    }
    o << "map.det_floor = " << fmt(c.map_det_floor) << "\n";
    o << "basis.family = " << c.basis_family << "\n";
    o << "basis.m = " << c.basis_m << "\n";
    o << "quad.order = " << c.quad_order << "\n";
    o << "grid.n_time = " << c.n_time() << "\n";
    o << "solver.T = " << fmt(c.solver_T) << "\n";
    o << "solver.dt = " << fmt(c.solver_dt) << "\n";
    o << "solver.seed = " << c.solver_seed << "\n";
    o << "solver.blowup_factor = " << fmt(c.solver_blowup_factor) << "\n";
    o << "ic.kind = " << c.ic_kind << "\n";
    o << "ic.mode_index = " << c.ic_mode_index << "\n";
    if (!c.ic_coeffs.empty()) {
        o << "ic.coeffs = ";
        for (size_t i = 0; i < c.ic_coeffs.size(); ++i)
            o << (i ? "," : "") << fmt(c.ic_coeffs[i]);
        o << "\n";
    }
    o << "force.kind = " << c.force_kind << "\n";
    o << "force.amplitude = " << fmt(c.force_amplitude) << "\n";
    o << "force.mode_index = " << c.force_mode_index << "\n";
    o << "noise.kind = " << c.noise_kind << "\n";
    o << "noise.amplitude = " << fmt(c.noise_amplitude) << "\n";
    o << "noise.mode_index = " << c.noise_mode_index << "\n";
    o << "mc.n_paths = " << c.mc_n_paths << "\n";
    o << "mc.m_list = ";
    for (size_t i = 0; i < c.mc_m_list.size(); ++i) o << (i ? "," : "") << c.mc_m_list[i];
    o << "\n";
    o << "conv.dt_list = ";
    for (size_t i = 0; i < c.conv_dt_list.size(); ++i)
        o << (i ? "," : "") << fmt(c.conv_dt_list[i]);
    o << "\n";
    o << "conv.n_seeds = " << c.conv_n_seeds << "\n";
    o << "output.field_grid = " << c.output_field_grid << "\n";
    o << "output.field_snapshots = " << c.output_field_snapshots << "\n";
    o << "output.dump_tensors = " << (c.output_dump_tensors ? "true" : "false") << "\n";
    return o.str();
}

}  // namespace movingns
