#include "movingns/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "movingns/errors.hpp"

namespace movingns {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    return out;
}

}  // namespace

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_energy_csv(const Scenario& sc, const CoefficientTrajectory& traj,
                      const std::string& path) {
    auto out = open_out(path);
    const auto e = energy_series(traj);
    const auto ge = grad_energy_series(sc, traj);
    out << "t,energy,grad_energy,W\n";
    for (size_t n = 0; n < e.size(); ++n)
        out << fmt17(traj.grid.node(static_cast<int>(n))) << ',' << fmt17(e[n]) << ','
            << fmt17(ge[n]) << ',' << fmt17(traj.path.cumulative[n]) << '\n';
}

void write_coeffs_csv(const CoefficientTrajectory& traj, const std::string& path) {
    auto out = open_out(path);
    out << "t";
    for (int j = 1; j <= traj.m; ++j) out << ",g_" << j;
    out << '\n';
    for (size_t n = 0; n < traj.g.size(); ++n) {
        out << fmt17(traj.grid.node(static_cast<int>(n)));
        for (int j = 0; j < traj.m; ++j) out << ',' << fmt17(traj.g[n][static_cast<size_t>(j)]);
        out << '\n';
    }
}

void write_field_csv(const FieldSnapshot& snap, const std::string& path) {
    auto out = open_out(path);
    out << "x1,x2,u1,u2,inside_flag\n";
    for (size_t i = 0; i < snap.x1.size(); ++i)
        out << fmt17(snap.x1[i]) << ',' << fmt17(snap.x2[i]) << ',' << fmt17(snap.u1[i]) << ','
            << fmt17(snap.u2[i]) << ',' << snap.inside[i] << '\n';
}

void write_manifest(const RunConfig& cfg, std::uint64_t seed, const std::string& path) {
    auto out = open_out(path);
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# run manifest\n";
    out << "# timestamp = " << stamp << "\n";
    out << "effective.seed = " << seed << "\n";
    out << config_echo(cfg);
}

void dump_tensors_csv(const std::vector<GalerkinTensors>& tensors, const TimeGrid& grid,
                      const std::string& lin_path, const std::string& tri_path) {
    auto lin = open_out(lin_path);
    auto tri = open_out(tri_path);
    lin << "s,j,k,value\n";
    tri << "s,j,k,l,value\n";
    for (size_t n = 0; n < tensors.size(); ++n) {
        const GalerkinTensors& t = tensors[n];
        const std::string s = fmt17(grid.node(static_cast<int>(n)));
        for (int j = 0; j < t.m; ++j)
            for (int k = 0; k < t.m; ++k) {
                lin << s << ',' << j + 1 << ',' << k + 1 << ',' << fmt17(t.lin(j, k)) << '\n';
                for (int l = 0; l < t.m; ++l)
                    tri << s << ',' << j + 1 << ',' << k + 1 << ',' << l + 1 << ','
                        << fmt17(t.tri(j, k, l)) << '\n';
            }
    }
}

}  // namespace movingns
