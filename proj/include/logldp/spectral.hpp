// Dirichlet-Laplacian eigenbasis on the interval (0, L): spectral fields,
// collocation transforms, Sobolev norms, the logarithmic Sobolev gaps, the
// Lyapunov transform Phi, the path metric rho, and the two nonlinear
// Gronwall bounds used by the a-priori estimates.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace logldp {

struct DomainConfig {
  double L = 1.0;    // interval length
  int n_modes = 16;  // Galerkin truncation level n
  int n_quad = 64;   // physical collocation points M
  int d = 1;         // spatial dimension entering inequality constants

  double measure() const { return L; }
  bool dealiased() const { return n_quad >= 2 * n_modes + 1; }
  // Throws std::invalid_argument on L <= 0, n_modes < 1 or n_quad < n_modes.
  // The dealiasing requirement n_quad >= 2*n_modes+1 is enforced by the CLI
  // config schema, not here; square transforms (n_quad == n_modes) are needed
  // by the pointwise solver oracles.
  void validate() const;

  friend bool operator==(const DomainConfig&, const DomainConfig&) = default;
};

// lambda_i = (i pi / L)^2, 1-based. Throws on i outside [1, n_modes].
double eigenvalue(const DomainConfig& dom, int i);

// Coefficients on the orthonormal H-basis e_i(x) = sqrt(2/L) sin(i pi x / L).
struct SpectralField {
  DomainConfig domain;
  std::vector<double> coeffs;

  static SpectralField zero(const DomainConfig& dom);
  // c * e_i. Throws on i outside [1, n_modes].
  static SpectralField basis(const DomainConfig& dom, int i, double c = 1.0);
};

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);

struct Norms {
  double h;      // ||u||       = (sum c_i^2)^{1/2}
  double v;      // ||u||_V     = (sum lambda_i c_i^2)^{1/2}
  double vstar;  // ||u||_{V*}  = (sum c_i^2 / lambda_i)^{1/2}
};

Norms norms(const SpectralField& u);
double h_norm(const SpectralField& u);
double v_norm(const SpectralField& u);
double vstar_norm(const SpectralField& u);
double h_inner(const SpectralField& a, const SpectralField& b);
double h_dist(const SpectralField& a, const SpectralField& b);

// Collocation on the uniform interior grid x_k = (k+1) L / (M+1), k = 0..M-1,
// with a precomputed sine table. from_physical is both the exact inverse of
// to_physical on sampled bandlimited data and the trapezoid-rule projection
// <g, e_i> (the two coincide on this grid).
class SineTransform {
 public:
  explicit SineTransform(const DomainConfig& dom);

  const DomainConfig& domain() const { return dom_; }
  int n_modes() const { return dom_.n_modes; }
  int n_quad() const { return dom_.n_quad; }
  double node(int k) const;
  double node_weight() const { return dom_.L / (dom_.n_quad + 1); }

  std::vector<double> to_physical(const SpectralField& u) const;
  void to_physical(std::span<const double> coeffs, std::span<double> out) const;
  SpectralField from_physical(std::span<const double> samples) const;
  void from_physical(std::span<const double> samples, std::span<double> out) const;

  // Trapezoid rule over (0, L) for integrands vanishing at the boundary.
  double integrate_samples(std::span<const double> f_at_nodes) const;
  // integral of f(u(x)) dx with f applied at the collocation nodes.
  double integrate_pointwise(const SpectralField& u,
                             const std::function<double(double)>& f) const;

 private:
  DomainConfig dom_;
  std::vector<double> table_;  // table_[i*M + k] = sin((i+1) pi (k+1) / (M+1))
};

// RHS - LHS of the logarithmic Sobolev inequality
//   int |u|^2 log|u| <= eps ||u||_V^2 + (d/4) log(1/eps) ||u||^2
//                       + ||u||^2 log ||u||.
// Throws if u == 0 or eps <= 0.
double log_sobolev_gap(const SineTransform& tr, const SpectralField& u, double eps);

// Same with log_+ inside the integral and + m(D)/(2e) on the RHS.
double log_sobolev_plus_gap(const SineTransform& tr, const SpectralField& u, double eps);

// Phi(z) = exp( int_0^z dx / (1 + x + x rho(x)) ) with
// rho(x) = x/e on [0, e), log x for x >= e. Phi' = Phi / (1 + z + z rho(z)).
class PhiFunction {
 public:
  static constexpr double rho_switch = 2.718281828459045235360287471353;

  double rho(double x) const;
  double phi(double z) const;        // throws on z < 0
  double phi_prime(double z) const;  // throws on z < 0

 private:
  double integral_to(double z) const;
};

struct PathMetricReport {
  double sup_h;   // sup_{s in [a,b]} ||u(s) - v(s)||
  double int_v;   // int_a^b ||u(s) - v(s)||_V^2 ds (trapezoid on the grid)
  double rho;     // sqrt(sup_h^2 + int_v)
  double a, b;
};

// Nonlinear Gronwall bound (power nonlinearity):
//   { c^{1-a} exp((1-a) int_{t0}^t A) +
//     (1-a) int_{t0}^t B(s) exp((1-a) int_s^t A) ds }^{1/(1-a)}.
// Throws on alpha outside [0,1) or c < 0.
double gronwall_bound_61(double c, double alpha,
                         const std::function<double(double)>& a,
                         const std::function<double(double)>& b,
                         double t0, double t);

// Gronwall bound with logarithmic nonlinearity:
//   M(t)^{exp(C2(t))} exp( exp(C2(t)) int_0^t c1(s) exp(-C2(s)) ds ),
// C2(t) = int_0^t c2. Throws if M(0) <= 1.
double gronwall_bound_62(const std::function<double(double)>& M,
                         const std::function<double(double)>& c1,
                         const std::function<double(double)>& c2, double t);

}  // namespace logldp
