// Trajectory export formats, deterministic CSV formatting and content
// hashing for run manifests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "logldp/trajectory.hpp"

namespace logldp {

// Shortest round-trip decimal representation; identical across runs.
std::string format_double(double x);

// CSV: header "t,coeff_1,...,coeff_n", one row per grid time.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

// Binary layout (little-endian): int64 n_modes, int64 n_steps, double L,
// double dt, then (n_steps+1) x n_modes coefficient doubles, row-major.
void write_trajectory_bin(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_bin(const std::filesystem::path& path);

// FNV-1a 64-bit over the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

}  // namespace logldp
