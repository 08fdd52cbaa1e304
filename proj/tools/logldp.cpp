// logldp: batch experiment driver. Reads a JSON config, dispatches to the
// named experiment, writes CSV/JSON artifacts plus a manifest with content
// hashes. Exit codes: 0 success, 2 validation error, 3 numerical failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "logldp/io.hpp"
#include "logldp/ldp.hpp"
#include "logldp/parallel.hpp"
#include "logldp/rng.hpp"
#include "logldp/skeleton.hpp"
#include "logldp/spde.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace logldp;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T def) {
  if (obj.contains(key)) return obj.at(key).get<T>();
  return def;
}

DomainConfig parse_domain(const json& cfg, json& resolved) {
  const json dom = cfg.value("domain", json::object());
  check_keys(dom, "domain", {"L", "n_modes", "n_quad", "d"});
  DomainConfig d;
  d.L = get_or(dom, "L", 1.0);
  d.n_modes = get_or(dom, "n_modes", 16);
  d.n_quad = get_or(dom, "n_quad", 2 * d.n_modes + 1);
  d.d = get_or(dom, "d", 1);
  d.validate();
  if (!d.dealiased())
    throw ConfigError("domain: n_quad must be >= 2*n_modes+1 (dealiasing)");
  resolved["domain"] = {{"L", d.L}, {"n_modes", d.n_modes}, {"n_quad", d.n_quad},
                        {"d", d.d}};
  return d;
}

CoefficientSet parse_sigma(const json& cfg, json& resolved) {
  const json s = cfg.value("sigma", json::object());
  check_keys(s, "sigma", {"kind", "param", "table_z", "table_sigma"});
  const std::string kind = get_or<std::string>(s, "kind", "linear");
  const double param = get_or(s, "param", 1.0);
  CoefficientSet out;
  if (kind == "tabulated") {
    if (!s.contains("table_z") || !s.contains("table_sigma"))
      throw ConfigError("sigma: tabulated kind needs table_z and table_sigma");
    out = sigma_tabulated(s.at("table_z").get<std::vector<double>>(),
                          s.at("table_sigma").get<std::vector<double>>());
  } else {
    out = builtin_sigma(kind, param);
  }
  resolved["sigma"] = {{"kind", kind},
                       {"param", param},
                       {"L1", out.L1},
                       {"L2", out.L2},
                       {"L3", out.L3},
                       {"L4", out.L4},
                       {"lipschitz_verified", out.lipschitz_verified},
                       {"growth_verified", out.growth_verified}};
  return out;
}

SkeletonConfig parse_solver(const json& cfg, json& resolved) {
  SkeletonConfig sk;
  sk.dom = parse_domain(cfg, resolved);
  sk.coeffs = parse_sigma(cfg, resolved);
  const json s = cfg.value("solver", json::object());
  check_keys(s, "solver", {"dt", "T", "scheme", "oracle_mode", "overflow_guard"});
  sk.dt = get_or(s, "dt", 1e-3);
  sk.T = get_or(s, "T", 0.5);
  const std::string scheme = get_or<std::string>(s, "scheme", "exp_euler");
  const std::string mode = get_or<std::string>(s, "oracle_mode", "full");
  sk.scheme = scheme_from_name(scheme);
  sk.oracle_mode = oracle_mode_from_name(mode);
  sk.overflow_guard = get_or(s, "overflow_guard", 1e12);
  sk.validate();
  resolved["solver"] = {{"dt", sk.dt},
                        {"T", sk.T},
                        {"scheme", scheme},
                        {"oracle_mode", mode},
                        {"overflow_guard", sk.overflow_guard}};
  return sk;
}

SpectralField parse_initial(const json& cfg, const DomainConfig& dom, json& resolved) {
  const json ini = cfg.value("initial", json::object());
  check_keys(ini, "initial", {"mode", "amplitude", "coeffs"});
  SpectralField u0 = SpectralField::zero(dom);
  if (ini.contains("coeffs")) {
    const auto c = ini.at("coeffs").get<std::vector<double>>();
    if (static_cast<int>(c.size()) != dom.n_modes)
      throw ConfigError("initial: coeffs length must equal n_modes");
    u0.coeffs = c;
    resolved["initial"] = {{"coeffs", c}};
  } else {
    const int mode = get_or(ini, "mode", 1);
    const double amp = get_or(ini, "amplitude", 1.0);
    u0 = SpectralField::basis(dom, mode, amp);
    resolved["initial"] = {{"mode", mode}, {"amplitude", amp}};
  }
  return u0;
}

Control parse_control(const json& cfg, double T, json& resolved) {
  const json c = cfg.value("control", json::object());
  check_keys(c, "control", {"pieces", "value", "values"});
  const int pieces = get_or(c, "pieces", 16);
  Control h = Control::zero(pieces, T);
  if (c.contains("values")) {
    const auto v = c.at("values").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != pieces)
      throw ConfigError("control: values length must equal pieces");
    h.values = v;
    resolved["control"] = {{"pieces", pieces}, {"values", v}};
  } else {
    const double value = get_or(c, "value", 0.0);
    for (auto& x : h.values) x = value;
    resolved["control"] = {{"pieces", pieces}, {"value", value}};
  }
  return h;
}

TargetSet parse_target(const json& cfg, const DomainConfig& dom, json& resolved) {
  const json t = cfg.value("target", json::object());
  check_keys(t, "target", {"kind", "level", "mode", "center"});
  const std::string kind = get_or<std::string>(t, "kind", "terminal_halfspace");
  const double level = get_or(t, "level", 0.5);
  resolved["target"] = {{"kind", kind}, {"level", level}};
  if (kind == "terminal_norm_above") return TargetSet::norm_above(level, dom);
  if (kind == "terminal_halfspace") {
    const int mode = get_or(t, "mode", 1);
    resolved["target"]["mode"] = mode;
    return TargetSet::halfspace(SpectralField::basis(dom, mode), level);
  }
  if (kind == "terminal_ball") {
    SpectralField center = SpectralField::zero(dom);
    if (t.contains("center")) {
      const auto c = t.at("center").get<std::vector<double>>();
      if (static_cast<int>(c.size()) != dom.n_modes)
        throw ConfigError("target: center length must equal n_modes");
      center.coeffs = c;
    }
    resolved["target"]["center"] = center.coeffs;
    return TargetSet::ball(center, level);
  }
  throw ConfigError("target: unknown kind '" + kind + "'");
}

std::vector<double> parse_eps_list(const json& cfg, json& resolved,
                                   std::vector<double> def) {
  auto list = get_or(cfg, "eps_list", def);
  if (list.empty()) throw ConfigError("eps_list: must be nonempty");
  resolved["eps_list"] = list;
  return list;
}

struct CsvWriter {
  std::ofstream out;
  explicit CsvWriter(const fs::path& p) : out(p, std::ios::binary) {
    if (!out) throw std::runtime_error("cannot open " + p.string());
  }
  void header(const std::string& h) { out << h << "\n"; }
  template <typename... Ts>
  void row(Ts... vals) {
    bool first = true;
    auto emit = [&](auto v) {
      if (!first) out << ",";
      first = false;
      if constexpr (std::is_floating_point_v<decltype(v)>)
        out << format_double(v);
      else
        out << v;
    };
    (emit(vals), ...);
    out << "\n";
  }
};

struct RunContext {
  json cfg;
  json resolved;
  fs::path out_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<fs::path> outputs;

  fs::path artifact(const std::string& name) {
    outputs.push_back(out_dir / name);
    return out_dir / name;
  }
};

// ---------------------------------------------------------------------------
// experiments

void run_skeleton(RunContext& ctx, json& results) {
  const SkeletonConfig sk = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, sk.dom, ctx.resolved);
  const Control h = parse_control(ctx.cfg, sk.T, ctx.resolved);
  const Trajectory traj = solve_skeleton(u0, h, sk);
  write_trajectory_csv(ctx.artifact("trajectory.csv"), traj);
  write_trajectory_bin(ctx.artifact("trajectory.bin"), traj);
  const UniformBoundReport rep = uniform_bound_report(traj, sk);
  results["terminal_h_norm"] = h_norm(traj.terminal());
  results["sup_h2"] = rep.sup_h2;
  results["int_v2"] = rep.int_v2;
  results["apriori_bound"] = rep.bound;
  results["bound_dominates"] = rep.observed <= rep.bound;
  // exact semigroup check in the linear oracle mode with no forcing
  if (sk.oracle_mode == OracleMode::heat_only && h.energy() == 0.0) {
    double max_err = 0.0;
    for (std::size_t r = 0; r < traj.times.size(); ++r)
      for (int i = 1; i <= sk.dom.n_modes; ++i) {
        const double expect = u0.coeffs[i - 1] *
                              std::exp(-eigenvalue(sk.dom, i) * traj.times[r]);
        max_err = std::max(max_err,
                           std::abs(traj.states[r].coeffs[i - 1] - expect));
      }
    results["heat_oracle_max_error"] = max_err;
  }
}

void run_simulate(RunContext& ctx, json& results) {
  EnsembleConfig ec;
  ec.base = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, ec.base.dom, ctx.resolved);
  const json ens = ctx.cfg.value("ensemble", json::object());
  check_keys(ens, "ensemble", {"n_paths", "eps", "dump_trajectories"});
  ec.n_paths = get_or(ens, "n_paths", 16);
  ec.eps = get_or(ens, "eps", 0.1);
  const bool dump = get_or(ens, "dump_trajectories", false);
  ctx.resolved["ensemble"] = {{"n_paths", ec.n_paths},
                              {"eps", ec.eps},
                              {"dump_trajectories", dump}};
  if (ctx.cfg.contains("control"))
    ec.control = parse_control(ctx.cfg, ec.base.T, ctx.resolved);
  ec.base_seed = ctx.seed;
  ec.threads = ctx.threads;
  const auto ensemble = simulate_ensemble(u0, ec);

  CsvWriter csv(ctx.artifact("paths.csv"));
  csv.header("path,terminal_h_norm,sup_h_norm,int_v2");
  for (std::size_t p = 0; p < ensemble.size(); ++p) {
    double sup_h = 0.0;
    std::vector<double> v2(ensemble[p].states.size());
    for (std::size_t i = 0; i < ensemble[p].states.size(); ++i) {
      const Norms nu = norms(ensemble[p].states[i]);
      sup_h = std::max(sup_h, nu.h);
      v2[i] = nu.v * nu.v;
    }
    double iv = 0.0;
    for (std::size_t i = 0; i + 1 < v2.size(); ++i)
      iv += 0.5 * (v2[i] + v2[i + 1]) *
            (ensemble[p].times[i + 1] - ensemble[p].times[i]);
    csv.row(p, h_norm(ensemble[p].terminal()), sup_h, iv);
  }
  const PhiMomentReport rep = phi_moment_report(ensemble);
  results["phi_sup_mean"] = rep.sup_phi_mean;
  results["phi_sup_se"] = rep.sup_phi_se;
  results["phi_int_mean"] = rep.int_mean;
  results["phi_int_se"] = rep.int_se;
  results["phi_u0"] = rep.phi_u0;
  results["phi_ratio"] = rep.ratio;
  if (dump) {
    const int limit = std::min<int>(ec.n_paths, 8);  // size guard
    for (int p = 0; p < limit; ++p)
      write_trajectory_csv(ctx.artifact("path_" + std::to_string(p) + ".csv"),
                           ensemble[p]);
    results["dumped_paths"] = limit;
  }
}

void run_rate_function(RunContext& ctx, json& results) {
  const SkeletonConfig sk = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, sk.dom, ctx.resolved);
  const TargetSet target = parse_target(ctx.cfg, sk.dom, ctx.resolved);
  const json o = ctx.cfg.value("optimizer", json::object());
  check_keys(o, "optimizer",
             {"control_pieces", "n_starts", "max_iter", "grad_tol", "feas_tol",
              "penalty_init", "penalty_max", "penalty_factor", "start_scale"});
  OptimizerParams opt;
  opt.control_pieces = get_or(o, "control_pieces", 32);
  opt.n_starts = get_or(o, "n_starts", 8);
  opt.max_iter = get_or(o, "max_iter", 400);
  opt.grad_tol = get_or(o, "grad_tol", 1e-8);
  opt.feas_tol = get_or(o, "feas_tol", 1e-4);
  opt.penalty_init = get_or(o, "penalty_init", 1.0);
  opt.penalty_max = get_or(o, "penalty_max", 1e6);
  opt.penalty_factor = get_or(o, "penalty_factor", 10.0);
  opt.start_scale = get_or(o, "start_scale", 1.0);
  opt.seed = ctx.seed;
  ctx.resolved["optimizer"] = {{"control_pieces", opt.control_pieces},
                               {"n_starts", opt.n_starts},
                               {"max_iter", opt.max_iter},
                               {"grad_tol", opt.grad_tol},
                               {"feas_tol", opt.feas_tol},
                               {"penalty_init", opt.penalty_init},
                               {"penalty_max", opt.penalty_max},
                               {"penalty_factor", opt.penalty_factor},
                               {"start_scale", opt.start_scale}};
  const RateFunctionResult res = rate_function(u0, target, sk, opt, ctx.threads);
  CsvWriter csv(ctx.artifact("h_star.csv"));
  csv.header("piece,t_mid,value");
  for (int k = 0; k < res.h_star.pieces(); ++k)
    csv.row(k, (k + 0.5) * sk.T / res.h_star.pieces(), res.h_star.values[k]);
  results["cost"] = res.cost;
  results["feasible"] = res.feasible;
  results["feasibility_gap"] = res.feasibility_gap;
  results["best_start"] = res.best_start;
  results["terminal_coeffs"] = res.terminal.coeffs;
  results["trace"] = {{"stages", res.trace.stages},
                      {"iterations", res.trace.iterations},
                      {"function_evals", res.trace.function_evals},
                      {"stage_costs", res.trace.stage_costs},
                      {"stage_gaps", res.trace.stage_gaps},
                      {"final_grad_norms", res.trace.final_grad_norms}};
  if (!res.feasible)
    throw SolverError("rate_function: infeasible after penalty continuation",
                      -1, sk.T, res.feasibility_gap);
}

void run_mc_estimate(RunContext& ctx, json& results) {
  const SkeletonConfig sk = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, sk.dom, ctx.resolved);
  const TargetSet target = parse_target(ctx.cfg, sk.dom, ctx.resolved);
  const json ens = ctx.cfg.value("ensemble", json::object());
  check_keys(ens, "ensemble", {"n_paths"});
  const int n_paths = get_or(ens, "n_paths", 10000);
  ctx.resolved["ensemble"] = {{"n_paths", n_paths}};
  const auto eps_list = parse_eps_list(ctx.cfg, ctx.resolved, {0.4, 0.3, 0.2});
  const auto rows =
      mc_rare_event(u0, target, eps_list, n_paths, sk, ctx.seed, ctx.threads);
  CsvWriter csv(ctx.artifact("results.csv"));
  csv.header("eps,n_paths,hits,p_hat,ci_lo,ci_hi,neg_eps2_log_p,censored");
  for (const auto& r : rows)
    csv.row(r.eps, r.n_paths, r.hits, r.p_hat, r.ci_lo, r.ci_hi,
            r.neg_eps2_log_p, r.censored ? 1 : 0);
  results["rows"] = json::array();
  for (const auto& r : rows)
    results["rows"].push_back({{"eps", r.eps},
                               {"p_hat", r.p_hat},
                               {"neg_eps2_log_p", r.neg_eps2_log_p},
                               {"censored", r.censored}});
}

void run_condition_a(RunContext& ctx, json& results) {
  const SkeletonConfig sk = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, sk.dom, ctx.resolved);
  const Control h = parse_control(ctx.cfg, sk.T, ctx.resolved);
  const json ens = ctx.cfg.value("ensemble", json::object());
  check_keys(ens, "ensemble", {"n_paths", "delta"});
  const int n_paths = get_or(ens, "n_paths", 64);
  const double delta = get_or(ens, "delta", 0.0);
  ctx.resolved["ensemble"] = {{"n_paths", n_paths}, {"delta", delta}};
  const auto eps_list = parse_eps_list(ctx.cfg, ctx.resolved, {0.4, 0.2, 0.1, 0.05});
  const auto rows = condition_a_experiment(u0, h, eps_list, n_paths, sk, ctx.seed,
                                           delta, ctx.threads);
  CsvWriter csv(ctx.artifact("results.csv"));
  csv.header("eps,n_paths,n_failed,median_rho,q10,q90,delta,p_exceed");
  for (const auto& r : rows)
    csv.row(r.eps, r.n_paths, r.n_failed, r.median_rho, r.q10, r.q90, r.delta,
            r.p_exceed);
  results["medians"] = json::array();
  for (const auto& r : rows)
    results["medians"].push_back({{"eps", r.eps}, {"median_rho", r.median_rho}});
}

void run_condition_b(RunContext& ctx, json& results) {
  const SkeletonConfig sk = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, sk.dom, ctx.resolved);
  const Control h = parse_control(ctx.cfg, sk.T, ctx.resolved);
  const json cb = ctx.cfg.value("condition_b", json::object());
  check_keys(cb, "condition_b", {"amplitude", "energy_bound"});
  const double amplitude = get_or(cb, "amplitude", 1.0);
  const double energy_bound = get_or(cb, "energy_bound", 1e6);
  ctx.resolved["condition_b"] = {{"amplitude", amplitude},
                                 {"energy_bound", energy_bound}};
  const auto eps_list =
      parse_eps_list(ctx.cfg, ctx.resolved, {0.2, 0.1, 0.05, 0.025});
  const auto rows =
      condition_b_experiment(u0, h, eps_list, sk, amplitude, energy_bound);
  CsvWriter csv(ctx.artifact("results.csv"));
  csv.header("eps,rho,energy,weak_gap");
  for (const auto& r : rows) {
    const Control h_eps = oscillatory_control(h, amplitude, r.eps, sk.n_steps());
    const WeakEnergyReport wr = weak_energy_check(h_eps, h);
    csv.row(r.eps, r.rho, r.energy, wr.max_pairing_gap);
  }
  results["rows"] = json::array();
  for (const auto& r : rows)
    results["rows"].push_back({{"eps", r.eps}, {"rho", r.rho}});
}

void run_verify_inequalities(RunContext& ctx, json& results) {
  json resolved_dummy;
  const DomainConfig dom = parse_domain(ctx.cfg, ctx.resolved);
  const json v = ctx.cfg.value("verify", json::object());
  check_keys(v, "verify", {"n_samples", "amplitude"});
  const int n_samples = get_or(v, "n_samples", 1000);
  const double amplitude = get_or(v, "amplitude", 3.0);
  ctx.resolved["verify"] = {{"n_samples", n_samples}, {"amplitude", amplitude}};
  const SineTransform tr(dom);
  const CounterRng rng(ctx.seed, 7);

  const std::vector<double> eps_grid = {1e-3, 1e-2, 1e-1, 1.0};
  const std::vector<double> alpha_grid = {0.5, 0.9, 0.99};
  auto random_field = [&](std::uint64_t base) {
    SpectralField u = SpectralField::zero(dom);
    for (int i = 0; i < dom.n_modes; ++i)
      u.coeffs[i] = amplitude * rng.normal(base + i) / (1.0 + i);
    return u;
  };

  struct Stat {
    double min_gap = 1e300, max_gap = -1e300, sum = 0.0;
    long n = 0;
    void add(double g) {
      min_gap = std::min(min_gap, g);
      max_gap = std::max(max_gap, g);
      sum += g;
      ++n;
    }
  };
  Stat ls, lsp, bp, lpp;
  for (int s = 0; s < n_samples; ++s) {
    const std::uint64_t base = static_cast<std::uint64_t>(s) * 4096;
    const SpectralField u = random_field(base);
    const SpectralField w = random_field(base + 2048);
    for (double eps : eps_grid) {
      ls.add(log_sobolev_gap(tr, u, eps));
      lsp.add(log_sobolev_plus_gap(tr, u, eps));
      for (double alpha : alpha_grid) {
        bp.add(b_pairing_gap(tr, u, w, eps, alpha));
        lpp.add(logplus_pairing_gap(tr, u, w, eps, alpha));
      }
    }
  }
  CsvWriter csv(ctx.artifact("results.csv"));
  csv.header("check,n,min_gap,max_gap,mean_gap");
  auto emit = [&](const std::string& name, const Stat& st) {
    csv.row(name, st.n, st.min_gap, st.max_gap, st.sum / st.n);
    results[name] = {{"min_gap", st.min_gap}, {"n", st.n}};
  };
  emit("log_sobolev", ls);
  emit("log_sobolev_plus", lsp);
  emit("b_pairing", bp);
  emit("logplus_pairing", lpp);
  (void)resolved_dummy;
}

void run_convergence_study(RunContext& ctx, json& results) {
  SkeletonConfig sk = parse_solver(ctx.cfg, ctx.resolved);
  const SpectralField u0 = parse_initial(ctx.cfg, sk.dom, ctx.resolved);
  const Control h = parse_control(ctx.cfg, sk.T, ctx.resolved);
  const json cs = ctx.cfg.value("convergence", json::object());
  check_keys(cs, "convergence", {"dt_list", "n_list"});
  const auto dt_list =
      get_or(cs, "dt_list", std::vector<double>{1e-3, 5e-4, 2.5e-4});
  const auto n_list = get_or(cs, "n_list", std::vector<int>{8, 16, 32, 64});
  ctx.resolved["convergence"] = {{"dt_list", dt_list}, {"n_list", n_list}};

  CsvWriter csv(ctx.artifact("results.csv"));
  csv.header("study,param,value");
  // dt self-convergence at fixed truncation
  std::vector<double> errs;
  for (double dt : dt_list) {
    SkeletonConfig a = sk, b = sk;
    a.dt = dt;
    b.dt = dt / 2.0;
    Control ha = h, hb = h;
    const Trajectory ta = solve_skeleton(u0, ha, a);
    const Trajectory tb = solve_skeleton(u0, hb, b);
    const double err = h_dist(ta.terminal(), tb.terminal());
    errs.push_back(err);
    csv.row("dt_self_error", dt, err);
  }
  double order = 0.0;
  if (errs.size() >= 2) {
    double acc = 0.0;
    for (std::size_t i = 1; i < errs.size(); ++i)
      acc += std::log2(errs[i - 1] / errs[i]) /
             std::log2(dt_list[i - 1] / dt_list[i]);
    order = acc / (errs.size() - 1);
  }
  csv.row("dt_order", 0.0, order);
  results["dt_order"] = order;
  // Galerkin consistency in n
  std::vector<double> rhos;
  for (int n : n_list) {
    SkeletonConfig a = sk, b = sk;
    a.dom.n_modes = n;
    a.dom.n_quad = 2 * (2 * n) + 1;
    b.dom.n_modes = 2 * n;
    b.dom.n_quad = a.dom.n_quad;
    SpectralField ua = SpectralField::zero(a.dom), ub = SpectralField::zero(b.dom);
    for (int i = 0; i < std::min(a.dom.n_modes, static_cast<int>(u0.coeffs.size())); ++i)
      ua.coeffs[i] = u0.coeffs[i];
    for (int i = 0; i < std::min(b.dom.n_modes, static_cast<int>(u0.coeffs.size())); ++i)
      ub.coeffs[i] = u0.coeffs[i];
    Control hc = h;
    const Trajectory ta = solve_skeleton(ua, hc, a);
    const Trajectory tb = solve_skeleton(ub, hc, b);
    // compare on the common first n modes, embedded in the finer space
    double sup = 0.0;
    std::vector<double> v2(ta.states.size());
    for (std::size_t r = 0; r < ta.states.size(); ++r) {
      SpectralField diff = tb.states[r];
      for (int i = 0; i < a.dom.n_modes; ++i)
        diff.coeffs[i] -= ta.states[r].coeffs[i];
      const Norms nd = norms(diff);
      sup = std::max(sup, nd.h);
      v2[r] = nd.v * nd.v;
    }
    double iv = 0.0;
    for (std::size_t r = 0; r + 1 < v2.size(); ++r)
      iv += 0.5 * (v2[r] + v2[r + 1]) * (ta.times[r + 1] - ta.times[r]);
    const double rho = std::sqrt(sup * sup + iv);
    rhos.push_back(rho);
    csv.row("galerkin_rho", n, rho);
  }
  results["galerkin_rhos"] = rhos;
}

// ---------------------------------------------------------------------------

int run_experiment(const std::string& experiment, const fs::path& config_path,
                   const fs::path& output_override, int threads_override,
                   long long seed_override) {
  RunContext ctx;
  const auto t0 = std::chrono::steady_clock::now();
  json manifest;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path.string());
    try {
      ctx.cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    static const std::set<std::string> top_keys = {
        "domain",  "sigma",    "solver",      "initial", "control",
        "ensemble", "target",  "optimizer",   "eps_list", "condition_b",
        "verify",  "convergence", "output_dir", "seed",  "threads"};
    check_keys(ctx.cfg, "config", top_keys);

    ctx.seed = seed_override >= 0 ? static_cast<std::uint64_t>(seed_override)
                                  : get_or<std::uint64_t>(ctx.cfg, "seed", 0);
    ctx.threads = threads_override > 0
                      ? threads_override
                      : get_or(ctx.cfg, "threads", 0);
    if (ctx.threads <= 0) {
      if (const char* env = std::getenv("LOGLDP_THREADS"))
        ctx.threads = std::atoi(env);
      if (ctx.threads <= 0) ctx.threads = hardware_threads();
    }
    ctx.out_dir = !output_override.empty()
                      ? output_override
                      : fs::path(get_or<std::string>(ctx.cfg, "output_dir", "out"));
    fs::create_directories(ctx.out_dir);
    ctx.resolved["seed"] = ctx.seed;
    ctx.resolved["threads"] = ctx.threads;
    ctx.resolved["output_dir"] = ctx.out_dir.string();

    json results;
    if (experiment == "skeleton") run_skeleton(ctx, results);
    else if (experiment == "simulate") run_simulate(ctx, results);
    else if (experiment == "rate-function") run_rate_function(ctx, results);
    else if (experiment == "mc-estimate") run_mc_estimate(ctx, results);
    else if (experiment == "condition-a") run_condition_a(ctx, results);
    else if (experiment == "condition-b") run_condition_b(ctx, results);
    else if (experiment == "verify-inequalities") run_verify_inequalities(ctx, results);
    else if (experiment == "convergence-study") run_convergence_study(ctx, results);
    else throw ConfigError("unknown experiment '" + experiment + "'");

    {
      std::ofstream rout(ctx.out_dir / "results.json", std::ios::binary);
      rout << results.dump(2) << "\n";
    }
    ctx.outputs.push_back(ctx.out_dir / "results.json");

    const auto t1 = std::chrono::steady_clock::now();
    manifest["experiment"] = experiment;
    manifest["version"] = kVersion;
    manifest["status"] = "ok";
    manifest["config"] = ctx.resolved;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(t1 - t0).count();
    manifest["outputs"] = json::array();
    for (const auto& p : ctx.outputs)
      manifest["outputs"].push_back(
          {{"file", p.filename().string()}, {"hash", file_hash(p)}});
    std::ofstream mout(ctx.out_dir / "manifest.json", std::ios::binary);
    mout << manifest.dump(2) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    if (!ctx.out_dir.empty()) {
      manifest["status"] = "numerical_failure";
      manifest["reason"] = e.what();
      manifest["config"] = ctx.resolved;
      std::ofstream mout(ctx.out_dir / "manifest.json", std::ios::binary);
      mout << manifest.dump(2) << "\n";
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_report(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  std::ifstream in(mpath);
  if (!in) {
    std::cerr << "report: no manifest in " << dir.string() << "\n";
    return 2;
  }
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "report: corrupt manifest: " << e.what() << "\n";
    return 2;
  }
  std::cout << "experiment: " << manifest.value("experiment", "?") << "\n";
  std::cout << "status:     " << manifest.value("status", "?") << "\n";
  if (manifest.contains("wall_time_s"))
    std::cout << "wall time:  " << manifest["wall_time_s"].get<double>() << " s\n";
  const fs::path rpath = dir / "results.json";
  if (std::ifstream rin(rpath); rin) {
    const json results = json::parse(rin);
    std::cout << "results:\n" << results.dump(2) << "\n";
  }
  const fs::path cpath = dir / "results.csv";
  if (std::ifstream cin(cpath); cin) {
    std::cout << "table:\n";
    std::string line;
    while (std::getline(cin, line)) std::cout << "  " << line << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Galerkin toolkit for the stochastic heat equation "
               "with logarithmic nonlinearity"};
  app.require_subcommand(1);

  const std::vector<std::string> experiments = {
      "simulate",    "skeleton",    "rate-function",       "mc-estimate",
      "condition-a", "condition-b", "verify-inequalities", "convergence-study"};

  std::string config_path;
  std::string output_dir;
  int threads = 0;
  long long seed = -1;
  std::string report_dir;

  std::vector<CLI::App*> subs;
  for (const auto& name : experiments) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--threads", threads, "worker threads (default: hardware)");
    sub->add_option("--output", output_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
    subs.push_back(sub);
  }
  CLI::App* rep = app.add_subcommand("report", "summarize a finished run");
  rep->add_option("dir", report_dir, "output directory of a run")->required();

  CLI11_PARSE(app, argc, argv);

  if (rep->parsed()) return run_report(report_dir);
  for (std::size_t i = 0; i < experiments.size(); ++i)
    if (subs[i]->parsed())
      return run_experiment(experiments[i], config_path, output_dir, threads, seed);
  return 2;
}
