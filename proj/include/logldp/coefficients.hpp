// Drift nonlinearity b(z) = z log|z|, diffusion coefficient library, and
// numerical certification of the log-Lipschitz hypothesis and the growth
// bound on sigma.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "logldp/spectral.hpp"

namespace logldp {

// z log|z| with the continuous extension b(0) = 0.
double drift_b(double z);
// log_+ z = log(1 v z)
double log_plus(double z);

enum class SigmaKind { constant, linear, sqrt_log, user };

struct CoefficientSet {
  std::function<double(double)> sigma;
  std::function<double(double)> sigma_prime;  // used by the adjoint
  SigmaKind kind = SigmaKind::user;
  double param = 0.0;  // c for constant, k for linear
  // |sigma(x)-sigma(y)| <= L1|x-y| + L2|x-y| (log_+(|x| v |y|))^{1/2}
  double L1 = 0.0, L2 = 0.0;
  // |sigma(x)| <= L3 + L4 |x| (log_+|x|)^{1/2}
  double L3 = 0.0, L4 = 0.0;
  bool lipschitz_verified = false;  // (H) certified (analytically or on a grid)
  bool growth_verified = false;

  std::string kind_name() const;
};

struct HFit {
  double L1 = 0.0;
  double L2 = 0.0;
  double max_violation = 0.0;  // worst residual at (L1, L2); <= 0 certifies
};

// constant(c): sigma == c, L1=L2=0, L3=c, L4=0.
// linear(k):   sigma(z) = k z, L1=k, L2=0, L3=0, L4 unused analytically
//              (growth holds with L3 = e^{1/2} k... certified numerically).
// sqrt_log:    sigma(z) = z (log_+|z|)^{1/2}; (H) constants fitted on a grid.
CoefficientSet sigma_constant(double c);
CoefficientSet sigma_linear(double k);
CoefficientSet sigma_sqrt_log();
// Tabulated (z, sigma(z)) pairs with linear interpolation; z ascending.
CoefficientSet sigma_tabulated(std::vector<double> z, std::vector<double> s);
// Dispatch by name for the CLI: "constant", "linear", "sqrt_log".
CoefficientSet builtin_sigma(const std::string& kind, double param = 1.0);

// Least (L1, L2) on the lattice {0, 0.125, ..., 16} (one refinement pass)
// such that (H) holds at every pair of distinct grid points.
HFit fit_H(const std::function<double(double)>& sigma,
           const std::vector<double>& grid);

// max over grid of |sigma(z)| - (L3 + L4 |z| (log_+|z|)^{1/2}); <= 0 certifies.
double check_growth(const std::function<double(double)>& sigma, double L3,
                    double L4, const std::vector<double>& grid);

// RHS - LHS of the drift pairing estimate
//   (u log|u| - v log|v|, u - v)
//     <= eps ||u-v||_V^2 + (1 + (d/4) log(1/eps)) ||u-v||^2
//        + ||u-v||^2 log ||u-v||
//        + (||u||^{2(1-a)} + ||v||^{2(1-a)}) ||u-v||^{2a} / (2(1-a)e).
// Throws if u == v, eps <= 0 or alpha outside (0, 1).
double b_pairing_gap(const SineTransform& tr, const SpectralField& u,
                     const SpectralField& v, double eps, double alpha);

// RHS - LHS of the log_+ pairing estimate; the RHS carries the extra
// (4 m(D))^{1-a} ||u-v||^{2a} / (2(1-a)e) term.
double logplus_pairing_gap(const SineTransform& tr, const SpectralField& u,
                           const SpectralField& v, double eps, double alpha);

}  // namespace logldp
