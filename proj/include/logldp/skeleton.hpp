// Galerkin solver for the deterministic controlled (skeleton) equation,
// its discrete adjoint, and the a-priori bound diagnostics.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "logldp/coefficients.hpp"
#include "logldp/spectral.hpp"
#include "logldp/trajectory.hpp"

namespace logldp {

enum class Scheme { exp_euler, imex_euler };
enum class OracleMode { full, heat_only, reaction_only };

Scheme scheme_from_name(const std::string& name);
OracleMode oracle_mode_from_name(const std::string& name);

struct SkeletonConfig {
  DomainConfig dom;
  CoefficientSet coeffs;
  double dt = 1e-3;
  double T = 1.0;
  Scheme scheme = Scheme::exp_euler;
  OracleMode oracle_mode = OracleMode::full;
  double overflow_guard = 1e12;  // abort threshold on the H-norm

  int n_steps() const;
  void validate() const;
};

// Raised when a trajectory exceeds the overflow guard or produces
// non-finite values (discrete blow-up: dt too large).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int step, double time, double norm)
      : std::runtime_error(what), step(step), time(time), norm(norm) {}
  int step;
  double time;
  double norm;
};

// P_n[f(u)]: transform to collocation values, apply f pointwise, project
// back onto the first n modes. Throws SolverError on non-finite output.
SpectralField project_nonlinearity(const SineTransform& tr, const SpectralField& u,
                                   const std::function<double(double)>& f);

// Shared one-path integrator. Per step (Lie splitting):
//   1. exact pointwise reaction flow y -> sign(y) |y|^{e^dt}, projected;
//   2. explicit control/noise increment (dt h_k + eps dW_k) P_n[sigma(u_k)]
//      with sigma frozen at the step's start state (Ito point);
//   3. linear flow, exact per mode (exp_euler) or backward Euler (imex).
// heat_only disables step 1; reaction_only disables steps 2-3's Laplacian
// and sigma. noise == nullptr or eps == 0 gives the deterministic path.
Trajectory integrate_path(const SpectralField& u0, const Control* h,
                          const NoisePath* noise, double eps,
                          const SkeletonConfig& cfg);

// Skeleton equation: du = Delta u dt + P_n[u log|u|] dt + P_n[sigma(u)] h dt.
Trajectory solve_skeleton(const SpectralField& u0, const Control& h,
                          const SkeletonConfig& cfg);

struct TerminalCost {
  std::function<double(const SpectralField&)> value;
  std::function<SpectralField(const SpectralField&)> gradient;
};

// Exact gradient of terminal_cost(u(T)) with respect to the control pieces,
// by a reverse sweep of the discrete time-stepping recursion.
std::vector<double> adjoint_gradient(const SpectralField& u0, const Control& h,
                                     const SkeletonConfig& cfg,
                                     const TerminalCost& terminal_cost);

struct UniformBoundReport {
  double sup_h2;     // sup_t ||u(t)||^2
  double int_v2;     // int_0^T ||u||_V^2
  double observed;   // sup_h2 + int_v2
  double bound;      // doubly-exponential a-priori bound; must dominate observed
};

// Evaluates the Galerkin moment bound assembled from ||u0||^2, the growth
// constants of sigma and the control energy. Throws if the trajectory
// carries no control.
UniformBoundReport uniform_bound_report(const Trajectory& traj,
                                        const SkeletonConfig& cfg);

}  // namespace logldp
