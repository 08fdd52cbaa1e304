// Path simulation of the small-noise SPDE and the controlled SPDE, driven
// by a single scalar Brownian motion; ensemble statistics and the
// Phi-moment diagnostic.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "logldp/skeleton.hpp"
#include "logldp/trajectory.hpp"

namespace logldp {

// i.i.d. Normal(0, dt) increments from the counter-based generator;
// bit-identical replay from (seed, stream).
NoisePath sample_noise(std::uint64_t seed, double dt, double T);
NoisePath sample_noise(std::uint64_t seed, std::uint64_t stream, double dt, double T);

struct EnsembleConfig {
  int n_paths = 1;
  double eps = 0.1;
  SkeletonConfig base;
  std::optional<Control> control;
  std::uint64_t base_seed = 0;
  int threads = 1;
};

// du = Delta u dt + P_n[u log|u|] dt + eps P_n[sigma(u)] dW + P_n[sigma(u)] h dt.
// eps = 0 with h present reduces bit-exactly to solve_skeleton.
Trajectory solve_spde(const SpectralField& u0, double eps, const Control* h,
                      const NoisePath& noise, const SkeletonConfig& cfg);

// Deterministic-order parallel ensemble; path p uses stream p.
std::vector<Trajectory> simulate_ensemble(const SpectralField& u0,
                                          const EnsembleConfig& cfg);

struct PhiMomentReport {
  double sup_phi_mean;    // E[sup_t Phi(||X_t||^2)]
  double sup_phi_se;
  double int_mean;        // E[int Phi'(||X_s||^2) ||X_s||_V^2 ds]
  double int_se;
  double phi_u0;          // Phi(||u0||^2)
  double ratio;           // (sup_phi_mean + int_mean) / phi_u0
  int n_paths;
  // per-path statistics in path order, for paired comparisons
  std::vector<double> sup_phi;
  std::vector<double> int_term;
};

PhiMomentReport phi_moment_report(const std::vector<Trajectory>& ensemble);

struct ConditionARow {
  double eps;
  int n_paths;
  int n_failed;        // paths lost to solver overflow
  double median_rho;
  double q10;
  double q90;
  double p_exceed;     // empirical P(rho_T > delta)
  double delta;
};

// Small-noise coupling experiment: skeleton Y once, X ensembles per eps with common
// random numbers; per-path rho_T(X, Y). delta <= 0 means "half the first
// row's median".
std::vector<ConditionARow> condition_a_experiment(
    const SpectralField& u0, const Control& h, const std::vector<double>& eps_list,
    int n_paths, const SkeletonConfig& cfg, std::uint64_t base_seed,
    double delta = 0.0, int threads = 1);

}  // namespace logldp
