#pragma once

#include <string>
#include <vector>

#include "movingns/solver.hpp"

namespace movingns {

/// 17-significant-digit decimal image of a double; round-trips bit-exactly.
std::string fmt17(double v);

void write_energy_csv(const Scenario& sc, const CoefficientTrajectory& traj,
                      const std::string& path);
void write_coeffs_csv(const CoefficientTrajectory& traj, const std::string& path);
void write_field_csv(const FieldSnapshot& snap, const std::string& path);

/// Effective config echo plus seed and a timestamp line; the timestamp is
/// the only non-deterministic byte region of a run's outputs.
void write_manifest(const RunConfig& cfg, std::uint64_t seed, const std::string& path);

/// Debug dumps: header `s,j,k,value` for the matrix, `s,j,k,l,value` for
/// the trilinear tensor. 1-based indices.
void dump_tensors_csv(const std::vector<GalerkinTensors>& tensors, const TimeGrid& grid,
                      const std::string& lin_path, const std::string& tri_path);

}  // namespace movingns
