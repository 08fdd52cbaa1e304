#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "logldp/spde.hpp"

using namespace logldp;

namespace {

SkeletonConfig base_config(int n_modes = 6, double dt = 1e-3, double T = 0.25) {
  SkeletonConfig cfg;
  cfg.dom = DomainConfig{1.0, n_modes, 2 * n_modes + 1, 1};
  cfg.coeffs = sigma_linear(0.5);
  cfg.dt = dt;
  cfg.T = T;
  return cfg;
}

}  // namespace

TEST_CASE("noise increments: moments and bit-exact replay") {
  const NoisePath a = sample_noise(123, 4, 1e-3, 2.0);
  const NoisePath b = sample_noise(123, 4, 1e-3, 2.0);
  REQUIRE(a.steps() == 2000);
  for (int k = 0; k < a.steps(); ++k) CHECK(a.increments[k] == b.increments[k]);
  const NoisePath c = sample_noise(123, 5, 1e-3, 2.0);
  CHECK(a.increments[0] != c.increments[0]);

  double mean = 0.0, var = 0.0;
  for (double w : a.increments) mean += w;
  mean /= a.steps();
  for (double w : a.increments) var += (w - mean) * (w - mean);
  var /= (a.steps() - 1);
  // dW ~ N(0, dt): SE(mean) = sqrt(dt/n), SE(var) ~ dt sqrt(2/n)
  CHECK(std::abs(mean) < 4.0 * std::sqrt(1e-3 / 2000));
  CHECK(std::abs(var - 1e-3) < 5.0 * 1e-3 * std::sqrt(2.0 / 2000));
}

TEST_CASE("eps = 0 reduces bit-exactly to the skeleton") {
  const SkeletonConfig cfg = base_config();
  const SpectralField u0 = SpectralField::basis(cfg.dom, 1, 1.0);
  Control h = Control::zero(5, cfg.T);
  h.values = {0.3, -0.2, 0.5, 0.1, 0.0};
  const NoisePath noise = sample_noise(7, cfg.dt, cfg.T);
  const Trajectory spde = solve_spde(u0, 0.0, &h, noise, cfg);
  const Trajectory skel = solve_skeleton(u0, h, cfg);
  REQUIRE(spde.times.size() == skel.times.size());
  for (std::size_t r = 0; r < spde.states.size(); ++r)
    for (int i = 0; i < cfg.dom.n_modes; ++i)
      CHECK(spde.states[r].coeffs[i] == skel.states[r].coeffs[i]);
}

TEST_CASE("zero diffusion coefficient makes the path deterministic") {
  SkeletonConfig cfg = base_config();
  cfg.coeffs = builtin_sigma("zero");
  const SpectralField u0 = SpectralField::basis(cfg.dom, 2, 0.7);
  const Control h = Control::zero(5, cfg.T);
  const Trajectory a = solve_spde(u0, 1.0, &h, sample_noise(1, cfg.dt, cfg.T), cfg);
  const Trajectory b = solve_spde(u0, 1.0, &h, sample_noise(2, cfg.dt, cfg.T), cfg);
  for (std::size_t r = 0; r < a.states.size(); ++r)
    for (int i = 0; i < cfg.dom.n_modes; ++i)
      CHECK(a.states[r].coeffs[i] == b.states[r].coeffs[i]);
}

TEST_CASE("additive-noise OU mode: exact discrete Duhamel identity") {
  // heat_only + constant sigma: each mode is a discrete OU recursion whose
  // terminal value is an explicit function of the recorded increments
  SkeletonConfig cfg = base_config(4, 1e-3, 0.2);
  cfg.oracle_mode = OracleMode::heat_only;
  cfg.coeffs = sigma_constant(1.0);
  const SpectralField u0 = SpectralField::zero(cfg.dom);
  const double eps = 0.3;
  SineTransform tr(cfg.dom);
  std::vector<double> ones(cfg.dom.n_quad, 1.0);
  const SpectralField s = tr.from_physical(ones);

  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    const NoisePath noise = sample_noise(seed, cfg.dt, cfg.T);
    const Trajectory traj = solve_spde(u0, eps, nullptr, noise, cfg);
    const int n_steps = cfg.n_steps();
    for (int i = 1; i <= cfg.dom.n_modes; ++i) {
      const double lam = eigenvalue(cfg.dom, i);
      double expect = 0.0;
      for (int k = 0; k < n_steps; ++k)
        expect += eps * noise.increments[k] * s.coeffs[i - 1] *
                  std::exp(-lam * (n_steps - k) * cfg.dt);
      CHECK(traj.terminal().coeffs[i - 1] ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("ensemble variance of the OU mode matches theory") {
  SkeletonConfig cfg = base_config(2, 2e-3, 0.2);
  cfg.oracle_mode = OracleMode::heat_only;
  cfg.coeffs = sigma_constant(1.0);
  EnsembleConfig ec;
  ec.base = cfg;
  ec.n_paths = 2000;
  ec.eps = 0.5;
  ec.base_seed = 99;
  ec.threads = 2;
  const auto ens = simulate_ensemble(SpectralField::zero(cfg.dom), ec);

  SineTransform tr(cfg.dom);
  std::vector<double> ones(cfg.dom.n_quad, 1.0);
  const SpectralField s = tr.from_physical(ones);
  const double lam = eigenvalue(cfg.dom, 1);
  const int n_steps = cfg.n_steps();
  double theory = 0.0;
  for (int k = 0; k < n_steps; ++k) {
    const double f = std::exp(-lam * (n_steps - k) * cfg.dt);
    theory += ec.eps * ec.eps * s.coeffs[0] * s.coeffs[0] * f * f * cfg.dt;
  }
  double mean = 0.0, var = 0.0;
  for (const auto& t : ens) mean += t.terminal().coeffs[0];
  mean /= ens.size();
  for (const auto& t : ens) {
    const double d = t.terminal().coeffs[0] - mean;
    var += d * d;
  }
  var /= (ens.size() - 1);
  CHECK(std::abs(mean) < 4.0 * std::sqrt(theory / ens.size()));
  CHECK(std::abs(var - theory) < 5.0 * theory * std::sqrt(2.0 / ens.size()));
}

TEST_CASE("strong self convergence under coupled refinement") {
  const SkeletonConfig ref = base_config(6, 1e-3, 0.2);
  const SpectralField u0 = SpectralField::basis(ref.dom, 1, 0.8);
  const double eps = 0.4;
  auto coarsen = [](const NoisePath& fine) {
    NoisePath coarse;
    coarse.dt = 2.0 * fine.dt;
    coarse.T = fine.T;
    coarse.seed = fine.seed;
    coarse.stream = fine.stream;
    coarse.increments.resize(fine.increments.size() / 2);
    for (std::size_t k = 0; k < coarse.increments.size(); ++k)
      coarse.increments[k] = fine.increments[2 * k] + fine.increments[2 * k + 1];
    return coarse;
  };
  std::vector<double> errs;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      SkeletonConfig fine_cfg = ref, coarse_cfg = ref;
      fine_cfg.dt = dt / 2.0;
      coarse_cfg.dt = dt;
      const NoisePath fine = sample_noise(40 + seed, fine_cfg.dt, ref.T);
      const NoisePath coarse = coarsen(fine);
      const Trajectory tf = solve_spde(u0, eps, nullptr, fine, fine_cfg);
      const Trajectory tc = solve_spde(u0, eps, nullptr, coarse, coarse_cfg);
      acc += h_dist(tf.terminal(), tc.terminal());
    }
    errs.push_back(acc / 8.0);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
}

TEST_CASE("Phi moment report on a deterministic ensemble") {
  SkeletonConfig cfg = base_config(4, 1e-3, 0.2);
  cfg.coeffs = builtin_sigma("zero");
  EnsembleConfig ec;
  ec.base = cfg;
  ec.n_paths = 3;
  ec.eps = 0.2;
  const SpectralField u0 = SpectralField::basis(cfg.dom, 1, 1.2);
  const auto ens = simulate_ensemble(u0, ec);
  const PhiMomentReport rep = phi_moment_report(ens);
  const PhiFunction Phi;
  // decaying path: the running sup sits at t = 0
  CHECK(rep.sup_phi_mean == doctest::Approx(Phi.phi(1.2 * 1.2)).epsilon(1e-9));
  CHECK(rep.sup_phi_se == doctest::Approx(0.0));
  CHECK(rep.int_mean > 0.0);
  CHECK(rep.ratio >= 1.0);
}

TEST_CASE("condition (a): medians shrink with eps and runs are reproducible") {
  const SkeletonConfig cfg = base_config(4, 2e-3, 0.2);
  const SpectralField u0 = SpectralField::basis(cfg.dom, 1, 0.8);
  Control h = Control::zero(5, cfg.T);
  h.values = {0.3, 0.1, -0.2, 0.0, 0.2};
  const std::vector<double> eps_list = {0.4, 0.2, 0.1};
  const auto rows = condition_a_experiment(u0, h, eps_list, 32, cfg, 5, 0.0, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].median_rho < rows[0].median_rho);
  CHECK(rows[2].median_rho < rows[1].median_rho);
  CHECK(rows[0].delta == doctest::Approx(0.5 * rows[0].median_rho));
  const auto again = condition_a_experiment(u0, h, eps_list, 32, cfg, 5, 0.0, 1);
  for (std::size_t r = 0; r < rows.size(); ++r)
    CHECK(rows[r].median_rho == again[r].median_rho);
  CHECK_THROWS_AS(condition_a_experiment(u0, h, {0.1, 0.2}, 8, cfg, 5),
                  std::invalid_argument);
}
