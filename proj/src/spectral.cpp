#include "logldp/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "logldp/trajectory.hpp"

namespace logldp {

namespace {

constexpr double kPi = std::numbers::pi;

// x^2 log|x| with the continuous extension f(0) = 0.
double x2logx(double x) {
  if (x == 0.0) return 0.0;
  return x * x * std::log(std::abs(x));
}

double log_plus(double z) { return z > 1.0 ? std::log(z) : 0.0; }

// Adaptive Simpson with absolute/relative tolerance.
double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double fm, double whole, double tol,
               int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, fa, b, fb, fm, whole, tol, 40);
}

// Composite Simpson on a fixed grid; used for the Gronwall coefficient
// integrals where the integrand is cheap and smooth.
constexpr int kGronwallGrid = 1 << 11;

}  // namespace

void DomainConfig::validate() const {
  if (!(L > 0.0)) throw std::invalid_argument("DomainConfig: L must be > 0");
  if (n_modes < 1) throw std::invalid_argument("DomainConfig: n_modes must be >= 1");
  if (n_quad < n_modes)
    throw std::invalid_argument("DomainConfig: n_quad must be >= n_modes");
  if (d < 1) throw std::invalid_argument("DomainConfig: d must be >= 1");
}

double eigenvalue(const DomainConfig& dom, int i) {
  if (i < 1 || i > dom.n_modes)
    throw std::out_of_range("eigenvalue: mode index out of range");
  const double w = i * kPi / dom.L;
  return w * w;
}

SpectralField SpectralField::zero(const DomainConfig& dom) {
  dom.validate();
  return {dom, std::vector<double>(dom.n_modes, 0.0)};
}

SpectralField SpectralField::basis(const DomainConfig& dom, int i, double c) {
  SpectralField u = zero(dom);
  if (i < 1 || i > dom.n_modes)
    throw std::out_of_range("SpectralField::basis: mode index out of range");
  u.coeffs[i - 1] = c;
  return u;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  SpectralField r = a;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] += b.coeffs[i];
  return r;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  SpectralField r = a;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] -= b.coeffs[i];
  return r;
}

SpectralField operator*(double s, const SpectralField& a) {
  SpectralField r = a;
  for (auto& c : r.coeffs) c *= s;
  return r;
}

Norms norms(const SpectralField& u) {
  double h2 = 0.0, v2 = 0.0, vs2 = 0.0;
  for (std::size_t i = 0; i < u.coeffs.size(); ++i) {
    const double c2 = u.coeffs[i] * u.coeffs[i];
    const double lam = eigenvalue(u.domain, static_cast<int>(i) + 1);
    h2 += c2;
    v2 += lam * c2;
    vs2 += c2 / lam;
  }
  return {std::sqrt(h2), std::sqrt(v2), std::sqrt(vs2)};
}

double h_norm(const SpectralField& u) {
  double s = 0.0;
  for (double c : u.coeffs) s += c * c;
  return std::sqrt(s);
}

double v_norm(const SpectralField& u) { return norms(u).v; }
double vstar_norm(const SpectralField& u) { return norms(u).vstar; }

double h_inner(const SpectralField& a, const SpectralField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) s += a.coeffs[i] * b.coeffs[i];
  return s;
}

double h_dist(const SpectralField& a, const SpectralField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) {
    const double d = a.coeffs[i] - b.coeffs[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SineTransform::SineTransform(const DomainConfig& dom) : dom_(dom) {
  dom_.validate();
  const int n = dom_.n_modes, M = dom_.n_quad;
  table_.resize(static_cast<std::size_t>(n) * M);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < M; ++k)
      table_[static_cast<std::size_t>(i) * M + k] =
          std::sin((i + 1) * kPi * (k + 1) / (M + 1));
}

double SineTransform::node(int k) const {
  return (k + 1) * dom_.L / (dom_.n_quad + 1);
}

void SineTransform::to_physical(std::span<const double> coeffs,
                                std::span<double> out) const {
  const int n = dom_.n_modes, M = dom_.n_quad;
  const double scale = std::sqrt(2.0 / dom_.L);
  for (int k = 0; k < M; ++k) out[k] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = scale * coeffs[i];
    if (c == 0.0) continue;
    const double* row = table_.data() + static_cast<std::size_t>(i) * M;
    for (int k = 0; k < M; ++k) out[k] += c * row[k];
  }
}

std::vector<double> SineTransform::to_physical(const SpectralField& u) const {
  std::vector<double> out(dom_.n_quad);
  to_physical(u.coeffs, out);
  return out;
}

void SineTransform::from_physical(std::span<const double> samples,
                                  std::span<double> out) const {
  const int n = dom_.n_modes, M = dom_.n_quad;
  // sqrt(2L)/(M+1) * sum_k u_k sin(...) equals both the collocation inverse
  // and the trapezoid projection <u, e_i>.
  const double scale = std::sqrt(2.0 * dom_.L) / (M + 1);
  for (int i = 0; i < n; ++i) {
    const double* row = table_.data() + static_cast<std::size_t>(i) * M;
    double s = 0.0;
    for (int k = 0; k < M; ++k) s += samples[k] * row[k];
    out[i] = scale * s;
  }
}

SpectralField SineTransform::from_physical(std::span<const double> samples) const {
  SpectralField u = SpectralField::zero(dom_);
  from_physical(samples, u.coeffs);
  return u;
}

double SineTransform::integrate_samples(std::span<const double> f_at_nodes) const {
  double s = 0.0;
  for (double f : f_at_nodes) s += f;
  return s * node_weight();
}

double SineTransform::integrate_pointwise(
    const SpectralField& u, const std::function<double(double)>& f) const {
  const auto phys = to_physical(u);
  double s = 0.0;
  for (double y : phys) s += f(y);
  return s * node_weight();
}

double log_sobolev_gap(const SineTransform& tr, const SpectralField& u, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("log_sobolev_gap: eps must be > 0");
  const Norms nu = norms(u);
  if (nu.h == 0.0) throw std::invalid_argument("log_sobolev_gap: u must be nonzero");
  const double lhs = tr.integrate_pointwise(u, x2logx);
  const double d = tr.domain().d;
  const double rhs = eps * nu.v * nu.v + (d / 4.0) * std::log(1.0 / eps) * nu.h * nu.h +
                     nu.h * nu.h * std::log(nu.h);
  return rhs - lhs;
}

double log_sobolev_plus_gap(const SineTransform& tr, const SpectralField& u,
                            double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("log_sobolev_plus_gap: eps must be > 0");
  const Norms nu = norms(u);
  if (nu.h == 0.0)
    throw std::invalid_argument("log_sobolev_plus_gap: u must be nonzero");
  const double lhs =
      tr.integrate_pointwise(u, [](double x) { return x * x * log_plus(std::abs(x)); });
  const double d = tr.domain().d;
  const double rhs = eps * nu.v * nu.v + (d / 4.0) * std::log(1.0 / eps) * nu.h * nu.h +
                     nu.h * nu.h * std::log(nu.h) +
                     tr.domain().measure() / (2.0 * PhiFunction::rho_switch);
  return rhs - lhs;
}

double PhiFunction::rho(double x) const {
  return x >= rho_switch ? std::log(x) : x / rho_switch;
}

double PhiFunction::integral_to(double z) const {
  const auto integrand = [this](double x) {
    return 1.0 / (1.0 + x + x * rho(x));
  };
  // The integrand has a kink at x = e; split there.
  if (z <= rho_switch) return adaptive_simpson(integrand, 0.0, z, 1e-12);
  return adaptive_simpson(integrand, 0.0, rho_switch, 1e-12) +
         adaptive_simpson(integrand, rho_switch, z, 1e-12);
}

double PhiFunction::phi(double z) const {
  if (z < 0.0) throw std::invalid_argument("PhiFunction::phi: z must be >= 0");
  return std::exp(integral_to(z));
}

double PhiFunction::phi_prime(double z) const {
  if (z < 0.0) throw std::invalid_argument("PhiFunction::phi_prime: z must be >= 0");
  return phi(z) / (1.0 + z + z * rho(z));
}

double Control::energy() const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v * v;
  return s * (T / values.size());
}

double Control::at(double t) const {
  if (values.empty()) return 0.0;
  const int K = pieces();
  int k = static_cast<int>(t / T * K);
  if (k < 0) k = 0;
  if (k >= K) k = K - 1;
  return values[k];
}

Control Control::zero(int pieces, double T) {
  return {std::vector<double>(pieces, 0.0), T};
}

PathMetricReport path_metric(const Trajectory& u, const Trajectory& v,
                             double a, double b) {
  if (u.times.size() != v.times.size())
    throw std::invalid_argument("path_metric: mismatched time grids");
  for (std::size_t i = 0; i < u.times.size(); ++i)
    if (u.times[i] != v.times[i])
      throw std::invalid_argument("path_metric: mismatched time grids");
  if (!u.states.empty() && !(u.states[0].domain == v.states[0].domain))
    throw std::invalid_argument("path_metric: mismatched domains");

  std::size_t ia = 0, ib = u.times.size() - 1;
  while (ia < u.times.size() && u.times[ia] < a - 1e-12) ++ia;
  while (ib > 0 && u.times[ib] > b + 1e-12) --ib;
  if (ia > ib) throw std::invalid_argument("path_metric: empty window");

  double sup_h = 0.0;
  std::vector<double> v2(ib - ia + 1);
  for (std::size_t i = ia; i <= ib; ++i) {
    const SpectralField diff = u.states[i] - v.states[i];
    const Norms nd = norms(diff);
    sup_h = std::max(sup_h, nd.h);
    v2[i - ia] = nd.v * nd.v;
  }
  double int_v = 0.0;
  for (std::size_t i = ia; i < ib; ++i)
    int_v += 0.5 * (v2[i - ia] + v2[i - ia + 1]) * (u.times[i + 1] - u.times[i]);
  return {sup_h, int_v, std::sqrt(sup_h * sup_h + int_v), u.times[ia], u.times[ib]};
}

double wbeta2_norm(const Trajectory& u, double beta) {
  if (!(beta > 0.0 && beta < 0.5))
    throw std::invalid_argument("wbeta2_norm: beta must be in (0, 1/2)");
  const std::size_t n = u.times.size();
  std::vector<double> w(n);  // trapezoid weights
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = u.times[i + 1] - u.times[i];
    w[i] += 0.5 * dt;
    w[i + 1] += 0.5 * dt;
  }
  double first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vs = vstar_norm(u.states[i]);
    first += w[i] * vs * vs;
  }
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double vs = vstar_norm(u.states[i] - u.states[j]);
      const double dt = std::abs(u.times[i] - u.times[j]);
      second += w[i] * w[j] * vs * vs / std::pow(dt, 1.0 + 2.0 * beta);
    }
  return std::sqrt(first + second);
}

double gronwall_bound_61(double c, double alpha,
                         const std::function<double(double)>& a,
                         const std::function<double(double)>& b,
                         double t0, double t) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("gronwall_bound_61: alpha must be in [0, 1)");
  if (c < 0.0) throw std::invalid_argument("gronwall_bound_61: c must be >= 0");
  const int m = kGronwallGrid;
  const double h = (t - t0) / m;
  // cumulative A(s) = int_{t0}^s a by the trapezoid rule on the fixed grid
  std::vector<double> A(m + 1, 0.0);
  double prev = a(t0);
  for (int i = 1; i <= m; ++i) {
    const double cur = a(t0 + i * h);
    A[i] = A[i - 1] + 0.5 * (prev + cur) * h;
    prev = cur;
  }
  const double oma = 1.0 - alpha;
  double inner = 0.0;  // int b(s) exp((1-a)(A(t) - A(s))) ds
  double prevf = b(t0) * std::exp(oma * (A[m] - A[0]));
  for (int i = 1; i <= m; ++i) {
    const double curf = b(t0 + i * h) * std::exp(oma * (A[m] - A[i]));
    inner += 0.5 * (prevf + curf) * h;
    prevf = curf;
  }
  const double base = std::pow(c, oma) * std::exp(oma * A[m]) + oma * inner;
  return std::pow(base, 1.0 / oma);
}

double gronwall_bound_62(const std::function<double(double)>& M,
                         const std::function<double(double)>& c1,
                         const std::function<double(double)>& c2, double t) {
  if (!(M(0.0) > 1.0))
    throw std::invalid_argument("gronwall_bound_62: M(0) must be > 1");
  const int m = kGronwallGrid;
  const double h = t / m;
  std::vector<double> C2(m + 1, 0.0);
  double prev = c2(0.0);
  for (int i = 1; i <= m; ++i) {
    const double cur = c2(i * h);
    C2[i] = C2[i - 1] + 0.5 * (prev + cur) * h;
    prev = cur;
  }
  double inner = 0.0;  // int c1(s) exp(-C2(s)) ds
  double prevf = c1(0.0);
  for (int i = 1; i <= m; ++i) {
    const double curf = c1(i * h) * std::exp(-C2[i]);
    inner += 0.5 * (prevf + curf) * h;
    prevf = curf;
  }
  const double e2 = std::exp(C2[m]);
  return std::pow(M(t), e2) * std::exp(e2 * inner);
}

}  // namespace logldp
