// Time-indexed solution paths, piecewise-constant controls and Brownian
// increment records shared by the skeleton and SPDE solvers.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "logldp/spectral.hpp"

namespace logldp {

// Piecewise-constant control on K uniform subintervals of [0, T].
struct Control {
  std::vector<double> values;
  double T = 1.0;

  int pieces() const { return static_cast<int>(values.size()); }
  // int_0^T h^2 ds = sum v_k^2 (T/K)
  double energy() const;
  // value at time t (right-open pieces, last piece closed)
  double at(double t) const;
  static Control zero(int pieces, double T);
};

// Brownian increments dW_k ~ N(0, dt), reproducible from (seed, stream).
struct NoisePath {
  std::vector<double> increments;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double dt = 0.0;
  double T = 0.0;

  int steps() const { return static_cast<int>(increments.size()); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::optional<Control> control;
  std::optional<NoisePath> noise;

  int steps() const { return static_cast<int>(times.size()) - 1; }
  const SpectralField& terminal() const { return states.back(); }
};

// rho_{a,b}(u, v): sup-in-time H distance plus the trapezoid V-integral of
// the squared difference over grid times in [a, b]. Throws on mismatched
// time grids or domains.
PathMetricReport path_metric(const Trajectory& u, const Trajectory& v,
                             double a, double b);

// W^{beta,2}([0,T]; V*) norm (p = 2), discrete double time-sum with the
// diagonal excluded. Throws on beta outside (0, 1/2).
double wbeta2_norm(const Trajectory& u, double beta);

}  // namespace logldp
