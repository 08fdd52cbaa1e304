#include "logldp/spde.hpp"

#include <algorithm>
#include <cmath>

#include "logldp/parallel.hpp"
#include "logldp/rng.hpp"

namespace logldp {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

}  // namespace

NoisePath sample_noise(std::uint64_t seed, double dt, double T) {
  return sample_noise(seed, 0, dt, T);
}

NoisePath sample_noise(std::uint64_t seed, std::uint64_t stream, double dt, double T) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_noise: dt must be > 0");
  const int n = static_cast<int>(std::llround(T / dt));
  NoisePath path{std::vector<double>(n), seed, stream, dt, T};
  const CounterRng rng(seed, stream);
  const double sqrt_dt = std::sqrt(dt);
  for (int k = 0; k < n; ++k) path.increments[k] = sqrt_dt * rng.normal(k);
  return path;
}

Trajectory solve_spde(const SpectralField& u0, double eps, const Control* h,
                      const NoisePath& noise, const SkeletonConfig& cfg) {
  return integrate_path(u0, h, &noise, eps, cfg);
}

std::vector<Trajectory> simulate_ensemble(const SpectralField& u0,
                                          const EnsembleConfig& cfg) {
  std::vector<Trajectory> out(cfg.n_paths);
  const Control* h = cfg.control.has_value() ? &*cfg.control : nullptr;
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t p) {
    const NoisePath noise =
        sample_noise(cfg.base_seed, p, cfg.base.dt, cfg.base.T);
    out[p] = solve_spde(u0, cfg.eps, h, noise, cfg.base);
  });
  return out;
}

PhiMomentReport phi_moment_report(const std::vector<Trajectory>& ensemble) {
  if (ensemble.empty())
    throw std::invalid_argument("phi_moment_report: empty ensemble");
  const PhiFunction Phi;
  PhiMomentReport rep{};
  rep.n_paths = static_cast<int>(ensemble.size());
  rep.sup_phi.resize(ensemble.size());
  rep.int_term.resize(ensemble.size());
  for (std::size_t p = 0; p < ensemble.size(); ++p) {
    const Trajectory& tr = ensemble[p];
    double sup_phi = 0.0;
    std::vector<double> integrand(tr.states.size());
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      const Norms nu = norms(tr.states[i]);
      sup_phi = std::max(sup_phi, Phi.phi(nu.h * nu.h));
      integrand[i] = Phi.phi_prime(nu.h * nu.h) * nu.v * nu.v;
    }
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < tr.times.size(); ++i)
      integral += 0.5 * (integrand[i] + integrand[i + 1]) *
                  (tr.times[i + 1] - tr.times[i]);
    rep.sup_phi[p] = sup_phi;
    rep.int_term[p] = integral;
  }
  auto mean_se = [](const std::vector<double>& x, double& mean, double& se) {
    mean = 0.0;
    for (double v : x) mean += v;
    mean /= x.size();
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var = x.size() > 1 ? var / (x.size() - 1) : 0.0;
    se = std::sqrt(var / x.size());
  };
  mean_se(rep.sup_phi, rep.sup_phi_mean, rep.sup_phi_se);
  mean_se(rep.int_term, rep.int_mean, rep.int_se);
  const double u0h = h_norm(ensemble.front().states.front());
  rep.phi_u0 = Phi.phi(u0h * u0h);
  rep.ratio = (rep.sup_phi_mean + rep.int_mean) / rep.phi_u0;
  return rep;
}

std::vector<ConditionARow> condition_a_experiment(
    const SpectralField& u0, const Control& h, const std::vector<double>& eps_list,
    int n_paths, const SkeletonConfig& cfg, std::uint64_t base_seed, double delta,
    int threads) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw std::invalid_argument(
          "condition_a_experiment: eps_list must be strictly decreasing");
  const Trajectory skeleton = solve_skeleton(u0, h, cfg);

  std::vector<ConditionARow> rows;
  for (double eps : eps_list) {
    std::vector<double> rho(n_paths, -1.0);
    std::vector<char> failed(n_paths, 0);
    parallel_for(n_paths, threads, [&](std::size_t p) {
      const NoisePath noise = sample_noise(base_seed, p, cfg.dt, cfg.T);
      try {
        const Trajectory x = solve_spde(u0, eps, &h, noise, cfg);
        rho[p] = path_metric(x, skeleton, 0.0, cfg.T).rho;
      } catch (const SolverError&) {
        failed[p] = 1;
      }
    });
    std::vector<double> ok;
    ok.reserve(n_paths);
    int n_failed = 0;
    for (int p = 0; p < n_paths; ++p) {
      if (failed[p]) {
        ++n_failed;
      } else {
        ok.push_back(rho[p]);
      }
    }
    std::sort(ok.begin(), ok.end());
    ConditionARow row{};
    row.eps = eps;
    row.n_paths = n_paths;
    row.n_failed = n_failed;
    row.median_rho = quantile_sorted(ok, 0.5);
    row.q10 = quantile_sorted(ok, 0.1);
    row.q90 = quantile_sorted(ok, 0.9);
    if (rows.empty() && delta <= 0.0) delta = 0.5 * row.median_rho;
    row.delta = delta;
    int exceed = 0;
    for (double r : ok)
      if (r > delta) ++exceed;
    row.p_exceed = ok.empty() ? 0.0 : static_cast<double>(exceed) / ok.size();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace logldp
