#include "logldp/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace logldp {

namespace {

constexpr double kE = 2.718281828459045235360287471353;

double sqrt_log_sigma(double z) {
  const double a = std::abs(z);
  if (a <= 1.0) return 0.0;
  return z * std::sqrt(std::log(a));
}

double sqrt_log_sigma_prime(double z) {
  const double a = std::abs(z);
  if (a <= 1.0) return 0.0;
  // unbounded one-sided derivative at |z| = 1; clamp the log below
  const double w = std::max(std::log(a), 1e-4);
  return std::sqrt(w) + 1.0 / (2.0 * std::sqrt(w));
}

std::vector<double> symmetric_grid(double half_width, int points) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = -half_width + 2.0 * half_width * i / (points - 1);
  return g;
}

}  // namespace

double drift_b(double z) {
  if (z == 0.0) return 0.0;
  return z * std::log(std::abs(z));
}

double log_plus(double z) { return z > 1.0 ? std::log(z) : 0.0; }

std::string CoefficientSet::kind_name() const {
  switch (kind) {
    case SigmaKind::constant: return "constant";
    case SigmaKind::linear: return "linear";
    case SigmaKind::sqrt_log: return "sqrt_log";
    case SigmaKind::user: return "user";
  }
  return "user";
}

CoefficientSet sigma_constant(double c) {
  CoefficientSet s;
  s.sigma = [c](double) { return c; };
  s.sigma_prime = [](double) { return 0.0; };
  s.kind = SigmaKind::constant;
  s.param = c;
  s.L1 = 0.0;
  s.L2 = 0.0;
  s.L3 = std::abs(c);
  s.L4 = 0.0;
  s.lipschitz_verified = true;
  s.growth_verified = true;
  return s;
}

CoefficientSet sigma_linear(double k) {
  CoefficientSet s;
  s.sigma = [k](double z) { return k * z; };
  s.sigma_prime = [k](double) { return k; };
  s.kind = SigmaKind::linear;
  s.param = k;
  s.L1 = std::abs(k);
  s.L2 = 0.0;
  // |kz| <= k + k|z|(log_+|z|)^{1/2}: for |z|<=1 the constant covers it, and
  // z(1 - sqrt(log z)) on (1, e) is maximal at z = 1.
  s.L3 = std::abs(k);
  s.L4 = std::abs(k);
  s.lipschitz_verified = true;
  s.growth_verified = true;
  return s;
}

CoefficientSet sigma_sqrt_log() {
  CoefficientSet s;
  s.sigma = sqrt_log_sigma;
  s.sigma_prime = sqrt_log_sigma_prime;
  s.kind = SigmaKind::sqrt_log;
  s.L3 = 0.0;
  s.L4 = 1.0;  // equality by construction
  s.growth_verified = true;
  // (H) constants are certified on a compact lattice only; global validity
  // is an open question recorded in run manifests.
  const HFit fit = fit_H(s.sigma, symmetric_grid(1000.0, 201));
  s.L1 = fit.L1;
  s.L2 = fit.L2;
  s.lipschitz_verified = fit.max_violation <= 0.0;
  return s;
}

CoefficientSet sigma_tabulated(std::vector<double> z, std::vector<double> v) {
  if (z.size() != v.size() || z.size() < 2)
    throw std::invalid_argument("sigma_tabulated: need >= 2 matching samples");
  for (std::size_t i = 1; i < z.size(); ++i)
    if (!(z[i] > z[i - 1]))
      throw std::invalid_argument("sigma_tabulated: z must be strictly increasing");
  CoefficientSet s;
  auto interp = [z, v](double x) {
    if (x <= z.front()) return v.front();
    if (x >= z.back()) return v.back();
    const auto it = std::upper_bound(z.begin(), z.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - z.begin());
    const double t = (x - z[i - 1]) / (z[i] - z[i - 1]);
    return (1.0 - t) * v[i - 1] + t * v[i];
  };
  s.sigma = interp;
  const double dz = 1e-6;
  s.sigma_prime = [interp, dz](double x) {
    return (interp(x + dz) - interp(x - dz)) / (2.0 * dz);
  };
  s.kind = SigmaKind::user;
  const HFit fit = fit_H(s.sigma, z);
  s.L1 = fit.L1;
  s.L2 = fit.L2;
  s.lipschitz_verified = fit.max_violation <= 0.0;
  return s;
}

CoefficientSet builtin_sigma(const std::string& kind, double param) {
  if (kind == "constant") return sigma_constant(param);
  if (kind == "linear") return sigma_linear(param);
  if (kind == "sqrt_log") return sigma_sqrt_log();
  if (kind == "zero") return sigma_constant(0.0);
  throw std::invalid_argument("builtin_sigma: unknown kind '" + kind + "'");
}

HFit fit_H(const std::function<double(double)>& sigma,
           const std::vector<double>& grid) {
  // Precompute per-pair slope r and weight w; constraint L1 + L2 w >= r.
  std::vector<double> rs, ws;
  std::vector<double> sv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sv[i] = sigma(grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double dx = std::abs(grid[i] - grid[j]);
      if (dx == 0.0) continue;
      rs.push_back(std::abs(sv[i] - sv[j]) / dx);
      ws.push_back(std::sqrt(log_plus(std::max(std::abs(grid[i]), std::abs(grid[j])))));
    }
  auto needed_L1 = [&](double L2) {
    double need = 0.0;
    for (std::size_t p = 0; p < rs.size(); ++p)
      need = std::max(need, rs[p] - L2 * ws[p]);
    return need;
  };
  auto search = [&](double lo2, double hi2, double step) {
    double bestL1 = 0.0, bestL2 = 0.0, bestScore = -1.0;
    for (double L2 = lo2; L2 <= hi2 + 1e-12; L2 += step) {
      const double raw = needed_L1(L2);
      // snap L1 up to the lattice
      const double L1 = std::ceil(raw / step - 1e-12) * step;
      const double score = L1 + L2;
      if (bestScore < 0.0 || score < bestScore ||
          (score == bestScore && L1 < bestL1)) {
        bestScore = score;
        bestL1 = L1;
        bestL2 = L2;
      }
    }
    return std::pair<double, double>(bestL1, bestL2);
  };
  const double step = 0.125;
  auto [L1, L2] = search(0.0, 16.0, step);
  // one refinement pass around the best cell
  const double fine = step / 8.0;
  auto [L1f, L2f] = search(std::max(0.0, L2 - step), L2 + step, fine);
  if (L1f + L2f < L1 + L2) {
    L1 = L1f;
    L2 = L2f;
  }
  double viol = -1e300;
  for (std::size_t p = 0; p < rs.size(); ++p)
    viol = std::max(viol, rs[p] - L1 - L2 * ws[p]);
  if (rs.empty()) viol = 0.0;
  return {L1, L2, viol};
}

double check_growth(const std::function<double(double)>& sigma, double L3,
                    double L4, const std::vector<double>& grid) {
  double worst = -1e300;
  for (double z : grid) {
    const double rhs = L3 + L4 * std::abs(z) * std::sqrt(log_plus(std::abs(z)));
    worst = std::max(worst, std::abs(sigma(z)) - rhs);
  }
  return worst;
}

namespace {

// shared RHS tail of the two pairing bounds
double pairing_rhs(const SineTransform& tr, const SpectralField& u,
                   const SpectralField& v, double eps, double alpha,
                   bool with_one, bool with_measure_term) {
  const SpectralField diff = u - v;
  const Norms nd = norms(diff);
  const double nu = h_norm(u), nv = h_norm(v);
  const double d = tr.domain().d;
  const double hfac = (with_one ? 1.0 : 0.0) + (d / 4.0) * std::log(1.0 / eps);
  double rhs = eps * nd.v * nd.v + hfac * nd.h * nd.h + nd.h * nd.h * std::log(nd.h);
  const double oma = 1.0 - alpha;
  double tail = std::pow(nu * nu, oma) + std::pow(nv * nv, oma);
  if (with_measure_term) tail += std::pow(4.0 * tr.domain().measure(), oma);
  rhs += tail * std::pow(nd.h * nd.h, alpha) / (2.0 * oma * kE);
  return rhs;
}

void pairing_validate(const SpectralField& u, const SpectralField& v, double eps,
                      double alpha, const char* who) {
  if (!(eps > 0.0)) throw std::invalid_argument(std::string(who) + ": eps must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument(std::string(who) + ": alpha must be in (0, 1)");
  if (h_dist(u, v) == 0.0)
    throw std::invalid_argument(std::string(who) + ": u and v must differ");
}

}  // namespace

double b_pairing_gap(const SineTransform& tr, const SpectralField& u,
                     const SpectralField& v, double eps, double alpha) {
  pairing_validate(u, v, eps, alpha, "b_pairing_gap");
  const auto up = tr.to_physical(u);
  const auto vp = tr.to_physical(v);
  std::vector<double> f(up.size());
  for (std::size_t k = 0; k < up.size(); ++k)
    f[k] = (drift_b(up[k]) - drift_b(vp[k])) * (up[k] - vp[k]);
  const double lhs = tr.integrate_samples(f);
  return pairing_rhs(tr, u, v, eps, alpha, /*with_one=*/true,
                     /*with_measure_term=*/false) -
         lhs;
}

double logplus_pairing_gap(const SineTransform& tr, const SpectralField& u,
                           const SpectralField& v, double eps, double alpha) {
  pairing_validate(u, v, eps, alpha, "logplus_pairing_gap");
  const auto up = tr.to_physical(u);
  const auto vp = tr.to_physical(v);
  std::vector<double> f(up.size());
  for (std::size_t k = 0; k < up.size(); ++k) {
    const double d = up[k] - vp[k];
    f[k] = d * d * log_plus(std::max(std::abs(up[k]), std::abs(vp[k])));
  }
  const double lhs = tr.integrate_samples(f);
  return pairing_rhs(tr, u, v, eps, alpha, /*with_one=*/false,
                     /*with_measure_term=*/true) -
         lhs;
}

}  // namespace logldp
