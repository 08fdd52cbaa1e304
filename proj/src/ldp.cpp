#include "logldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "logldp/parallel.hpp"
#include "logldp/rng.hpp"

namespace logldp {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

TargetSet TargetSet::norm_above(double r, const DomainConfig& dom) {
  return {TargetKind::terminal_norm_above, r, SpectralField::zero(dom)};
}

TargetSet TargetSet::halfspace(SpectralField g, double c) {
  if (h_norm(g) == 0.0)
    throw std::invalid_argument("TargetSet::halfspace: zero normal");
  return {TargetKind::terminal_halfspace, c, std::move(g)};
}

TargetSet TargetSet::ball(SpectralField center, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("TargetSet::ball: negative radius");
  return {TargetKind::terminal_ball, r, std::move(center)};
}

std::string TargetSet::kind_name() const {
  switch (kind) {
    case TargetKind::terminal_norm_above: return "terminal_norm_above";
    case TargetKind::terminal_halfspace: return "terminal_halfspace";
    case TargetKind::terminal_ball: return "terminal_ball";
  }
  return "?";
}

double TargetSet::feasibility_gap(const SpectralField& u) const {
  switch (kind) {
    case TargetKind::terminal_norm_above:
      return std::max(0.0, level - h_norm(u));
    case TargetKind::terminal_halfspace:
      return std::max(0.0, level - h_inner(direction, u)) / h_norm(direction);
    case TargetKind::terminal_ball:
      return std::max(0.0, h_dist(u, direction) - level);
  }
  return 0.0;
}

bool TargetSet::contains(const SpectralField& u) const {
  return feasibility_gap(u) == 0.0;
}

double TargetSet::surrogate(const SpectralField& u) const {
  const double g = feasibility_gap(u);
  return g * g;
}

SpectralField TargetSet::surrogate_gradient(const SpectralField& u) const {
  SpectralField g = SpectralField::zero(u.domain);
  switch (kind) {
    case TargetKind::terminal_norm_above: {
      const double gap = std::max(0.0, level - h_norm(u));
      if (gap == 0.0) return g;
      const double nu = h_norm(u);
      if (nu == 0.0) {
        // subgradient choice at the origin: push along the first mode
        g.coeffs[0] = -2.0 * gap;
        return g;
      }
      for (std::size_t i = 0; i < u.coeffs.size(); ++i)
        g.coeffs[i] = -2.0 * gap * u.coeffs[i] / nu;
      return g;
    }
    case TargetKind::terminal_halfspace: {
      const double ng = h_norm(direction);
      const double s = std::max(0.0, level - h_inner(direction, u));
      if (s == 0.0) return g;
      for (std::size_t i = 0; i < u.coeffs.size(); ++i)
        g.coeffs[i] = -2.0 * s / (ng * ng) * direction.coeffs[i];
      return g;
    }
    case TargetKind::terminal_ball: {
      const double dist = h_dist(u, direction);
      const double gap = std::max(0.0, dist - level);
      if (gap == 0.0 || dist == 0.0) return g;
      for (std::size_t i = 0; i < u.coeffs.size(); ++i)
        g.coeffs[i] = 2.0 * gap * (u.coeffs[i] - direction.coeffs[i]) / dist;
      return g;
    }
  }
  return g;
}

namespace {

struct PenaltyProblem {
  const SpectralField& u0;
  const TargetSet& target;
  const SkeletonConfig& cfg;
  double weight;
  double piece_dt;  // T/K
  mutable int evals = 0;

  double value(const Control& h, SpectralField* terminal = nullptr) const {
    ++evals;
    const Trajectory traj = solve_skeleton(u0, h, cfg);
    if (terminal != nullptr) *terminal = traj.terminal();
    return weight * target.surrogate(traj.terminal()) + 0.5 * h.energy();
  }

  std::vector<double> gradient(const Control& h) const {
    const TerminalCost tc{
        [this](const SpectralField& u) { return target.surrogate(u); },
        [this](const SpectralField& u) { return target.surrogate_gradient(u); }};
    std::vector<double> g = adjoint_gradient(u0, h, cfg, tc);
    for (std::size_t k = 0; k < g.size(); ++k)
      g[k] = weight * g[k] + piece_dt * h.values[k];
    return g;
  }
};

// Gradient descent with a Barzilai-Borwein step proposal and Armijo
// backtracking; returns iterations used.
int minimize_stage(const PenaltyProblem& prob, Control& h, int max_iter,
                   double grad_tol, double* final_grad_norm) {
  double f = prob.value(h);
  std::vector<double> g = prob.gradient(h);
  std::vector<double> h_prev, g_prev;
  double step = 1.0 / std::max(1.0, norm2(g));
  int it = 0;
  for (; it < max_iter; ++it) {
    const double gn = norm2(g);
    if (gn <= grad_tol * std::max(1.0, std::abs(f))) break;
    if (!h_prev.empty()) {
      // BB1 step from the last secant pair
      std::vector<double> s(h.values.size()), y(g.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = h.values[i] - h_prev[i];
        y[i] = g[i] - g_prev[i];
      }
      const double sy = dot(s, y);
      const double ss = dot(s, s);
      if (sy > 1e-300 && std::isfinite(sy)) step = ss / sy;
      step = std::clamp(step, 1e-14, 1e6);
    }
    // Armijo backtracking on the proposed step
    Control trial = h;
    double t = step;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      for (std::size_t i = 0; i < h.values.size(); ++i)
        trial.values[i] = h.values[i] - t * g[i];
      const double ft = prob.value(trial);
      if (ft <= f - 1e-4 * t * gn * gn) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    h_prev = h.values;
    g_prev = g;
    h = trial;
    f = prob.value(h);
    g = prob.gradient(h);
  }
  if (final_grad_norm != nullptr) *final_grad_norm = norm2(g);
  return it;
}

}  // namespace

RateFunctionResult rate_function(const SpectralField& u0, const TargetSet& target,
                                 const SkeletonConfig& cfg,
                                 const OptimizerParams& opt, int threads) {
  const int K = opt.control_pieces;
  if (K < 1) throw std::invalid_argument("rate_function: control_pieces must be >= 1");
  const double piece_dt = cfg.T / K;

  std::vector<RateFunctionResult> per_start(opt.n_starts);
  parallel_for(opt.n_starts, threads, [&](std::size_t s) {
    Control h = Control::zero(K, cfg.T);
    if (s > 0) {
      const CounterRng rng(opt.seed, 1000 + s);
      for (int k = 0; k < K; ++k)
        h.values[k] = opt.start_scale * rng.normal(k);
    }
    RateFunctionResult res;
    res.trace = OptimizerTrace{};
    PenaltyProblem prob{u0, target, cfg, opt.penalty_init, piece_dt};
    for (double w = opt.penalty_init; w <= opt.penalty_max * 1.000001;
         w *= opt.penalty_factor) {
      prob.weight = w;
      double gnorm = 0.0;
      res.trace.iterations +=
          minimize_stage(prob, h, opt.max_iter, opt.grad_tol, &gnorm);
      ++res.trace.stages;
      SpectralField term = SpectralField::zero(cfg.dom);
      prob.value(h, &term);
      res.trace.stage_costs.push_back(0.5 * h.energy());
      res.trace.stage_gaps.push_back(target.feasibility_gap(term));
      res.trace.final_grad_norms.push_back(gnorm);
      if (res.trace.stage_gaps.back() <= opt.feas_tol &&
          w >= opt.penalty_max * 0.999999)
        break;
    }
    res.trace.function_evals = prob.evals;
    res.h_star = h;
    res.cost = 0.5 * h.energy();
    const Trajectory traj = solve_skeleton(u0, h, cfg);
    res.terminal = traj.terminal();
    res.feasibility_gap = target.feasibility_gap(res.terminal);
    res.feasible = res.feasibility_gap <= opt.feas_tol;
    per_start[s] = std::move(res);
  });

  // deterministic reduction: best feasible cost, else smallest gap
  int best = -1;
  for (int s = 0; s < opt.n_starts; ++s) {
    if (best < 0) {
      best = s;
      continue;
    }
    const auto& a = per_start[s];
    const auto& b = per_start[best];
    const bool better = (a.feasible && !b.feasible) ||
                        (a.feasible && b.feasible && a.cost < b.cost) ||
                        (!a.feasible && !b.feasible &&
                         a.feasibility_gap < b.feasibility_gap);
    if (better) best = s;
  }
  RateFunctionResult result = per_start[best];
  result.best_start = best;
  return result;
}

std::vector<RareEventRow> mc_rare_event(const SpectralField& u0,
                                        const TargetSet& target,
                                        const std::vector<double>& eps_list,
                                        int n_paths, const SkeletonConfig& cfg,
                                        std::uint64_t base_seed, int threads) {
  std::vector<RareEventRow> rows;
  for (double eps : eps_list) {
    std::vector<char> hit(n_paths, 0);
    parallel_for(n_paths, threads, [&](std::size_t p) {
      const NoisePath noise = sample_noise(base_seed, p, cfg.dt, cfg.T);
      const Trajectory x = solve_spde(u0, eps, nullptr, noise, cfg);
      hit[p] = target.contains(x.terminal()) ? 1 : 0;
    });
    int hits = 0;
    for (char c : hit) hits += c;
    RareEventRow row{};
    row.eps = eps;
    row.n_paths = n_paths;
    row.hits = hits;
    row.p_hat = static_cast<double>(hits) / n_paths;
    const double z = 1.959963984540054;
    const double n = n_paths, ph = row.p_hat;
    const double denom = 1.0 + z * z / n;
    const double center = (ph + z * z / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
    row.ci_lo = std::max(0.0, center - half);
    row.ci_hi = std::min(1.0, center + half);
    row.censored = hits == 0;
    row.neg_eps2_log_p =
        row.censored ? -eps * eps * std::log(row.ci_hi)
                     : -eps * eps * std::log(ph);
    rows.push_back(row);
  }
  return rows;
}

Control oscillatory_control(const Control& h, double amplitude, double eps,
                            int pieces) {
  Control out = Control::zero(pieces, h.T);
  for (int k = 0; k < pieces; ++k) {
    const double t_mid = (k + 0.5) * h.T / pieces;
    out.values[k] = h.at(t_mid) + amplitude * std::sin(t_mid / eps);
  }
  return out;
}

std::vector<ConditionBRow> condition_b_experiment(
    const SpectralField& u0, const Control& h, const std::vector<double>& eps_list,
    const SkeletonConfig& cfg, double amplitude, double energy_bound) {
  const int pieces = cfg.n_steps();
  const Trajectory base = solve_skeleton(u0, h, cfg);
  std::vector<ConditionBRow> rows;
  for (double eps : eps_list) {
    const Control h_eps = oscillatory_control(h, amplitude, eps, pieces);
    if (h_eps.energy() > energy_bound)
      throw std::invalid_argument(
          "condition_b_experiment: control family leaves the energy ball");
    const Trajectory y = solve_skeleton(u0, h_eps, cfg);
    rows.push_back({eps, path_metric(y, base, 0.0, cfg.T).rho, h_eps.energy()});
  }
  return rows;
}

WeakEnergyReport weak_energy_check(const Control& h_eps, const Control& h) {
  if (h_eps.T != h.T)
    throw std::invalid_argument("weak_energy_check: horizons differ");
  const int k1 = std::max(1, h.pieces()), k2 = std::max(1, h_eps.pieces());
  const int kmax = std::max(k1, k2), kmin = std::min(k1, k2);
  if (kmax % kmin != 0)
    throw std::invalid_argument("weak_energy_check: incompatible grids");
  const double T = h.T;
  const int m = 8 * kmax;  // midpoint rule on a common refinement
  auto pairing = [&](auto&& phi) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      const double t = (i + 0.5) * T / m;
      s += (h_eps.at(t) - h.at(t)) * phi(t) * (T / m);
    }
    return std::abs(s);
  };
  double worst = 0.0;
  worst = std::max(worst, pairing([](double) { return 1.0; }));
  worst = std::max(worst, pairing([T](double t) { return t / T; }));
  worst = std::max(worst, pairing([T](double t) { return (t / T) * (t / T); }));
  for (int j = 1; j <= 3; ++j)
    worst = std::max(worst, pairing([T, j](double t) {
      return std::sin(j * kPi * t / T);
    }));
  return {worst, h_eps.energy(), h.energy()};
}

}  // namespace logldp
