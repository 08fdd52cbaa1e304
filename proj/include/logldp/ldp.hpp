// Rate-function evaluation by penalty-continuation optimal control, direct
// Monte Carlo rare-event estimation, and the weak-convergence experiments.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logldp/skeleton.hpp"
#include "logldp/spde.hpp"

namespace logldp {

enum class TargetKind { terminal_norm_above, terminal_halfspace, terminal_ball };

// Terminal target set in H, with a smooth distance-squared penalty surrogate
// for states outside the set.
struct TargetSet {
  TargetKind kind;
  double level = 0.0;       // radius r or halfspace offset c
  SpectralField direction;  // halfspace normal g or ball center

  static TargetSet norm_above(double r, const DomainConfig& dom);
  static TargetSet halfspace(SpectralField g, double c);
  static TargetSet ball(SpectralField center, double r);

  bool contains(const SpectralField& u) const;
  // distance from u to the set (0 inside)
  double feasibility_gap(const SpectralField& u) const;
  double surrogate(const SpectralField& u) const;  // gap^2
  SpectralField surrogate_gradient(const SpectralField& u) const;
  std::string kind_name() const;
};

struct OptimizerParams {
  int control_pieces = 32;
  int n_starts = 8;
  int max_iter = 400;          // per continuation stage
  double grad_tol = 1e-8;      // relative gradient-norm stop
  double feas_tol = 1e-4;      // H-norm feasibility
  double penalty_init = 1.0;
  double penalty_max = 1e6;
  double penalty_factor = 10.0;
  double start_scale = 1.0;    // magnitude of random multi-start controls
  std::uint64_t seed = 0;
};

struct OptimizerTrace {
  int stages = 0;
  int iterations = 0;
  int function_evals = 0;
  std::vector<double> stage_costs;        // 0.5 * energy at end of each stage
  std::vector<double> stage_gaps;         // feasibility gap at end of each stage
  std::vector<double> final_grad_norms;   // per stage
};

struct RateFunctionResult {
  Control h_star;
  double cost = 0.0;            // 0.5 * int h*^2
  SpectralField terminal;       // u^{h*}(T)
  double feasibility_gap = 0.0;
  bool feasible = false;
  int best_start = -1;
  OptimizerTrace trace;
};

// inf { 0.5 int h^2 : u^h(T) in B } by quadratic-penalty continuation with
// adjoint gradients; gradient descent (Barzilai-Borwein proposal, Armijo
// backtracking), multi-start.
RateFunctionResult rate_function(const SpectralField& u0, const TargetSet& target,
                                 const SkeletonConfig& cfg,
                                 const OptimizerParams& opt, int threads = 1);

struct RareEventRow {
  double eps;
  int n_paths;
  int hits;
  double p_hat;
  double ci_lo, ci_hi;     // Wilson 95% interval
  double neg_eps2_log_p;   // -eps^2 log p_hat (the LDP diagnostic)
  bool censored;           // zero hits: one-sided bound only
};

std::vector<RareEventRow> mc_rare_event(const SpectralField& u0,
                                        const TargetSet& target,
                                        const std::vector<double>& eps_list,
                                        int n_paths, const SkeletonConfig& cfg,
                                        std::uint64_t base_seed, int threads = 1);

struct ConditionBRow {
  double eps;
  double rho;        // rho_T(Y^{h_eps}, Y^h)
  double energy;     // int h_eps^2
};

// Skeleton continuity experiment with the weakly-null family
// h_eps(t) = h(t) + A sin(t/eps), sampled on the solver grid. Throws if any
// member's energy exceeds energy_bound.
std::vector<ConditionBRow> condition_b_experiment(
    const SpectralField& u0, const Control& h, const std::vector<double>& eps_list,
    const SkeletonConfig& cfg, double amplitude, double energy_bound);

// Oscillatory control family member on the solver grid (piece midpoints).
Control oscillatory_control(const Control& h, double amplitude, double eps,
                            int pieces);

struct WeakEnergyReport {
  double max_pairing_gap;  // max over the dictionary of |int (h_eps - h) phi|
  double energy_h_eps;
  double energy_h;
};

// Dictionary: 1, t, t^2 and sin(j pi t / T), j = 1..3.
WeakEnergyReport weak_energy_check(const Control& h_eps, const Control& h);

}  // namespace logldp
