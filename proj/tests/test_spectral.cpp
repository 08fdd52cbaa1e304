#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "logldp/rng.hpp"
#include "logldp/spectral.hpp"
#include "logldp/trajectory.hpp"

using namespace logldp;

namespace {

const double kPi = 3.14159265358979323846;

SpectralField random_field(const DomainConfig& dom, std::uint64_t seed,
                           double amp = 1.0) {
  CounterRng rng(seed, 11);
  SpectralField u = SpectralField::zero(dom);
  for (int i = 0; i < dom.n_modes; ++i)
    u.coeffs[i] = amp * rng.normal(i) / (1.0 + i);
  return u;
}

// composite Simpson, independent of the adaptive quadrature in the library
double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// classic RK4 for scalar ODEs, used as an independent extremal-solution oracle
double rk4(const std::function<double(double, double)>& f, double y0, double t0,
           double t1, int steps) {
  double y = y0, t = t0;
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(t, y);
    const double k2 = f(t + h / 2, y + h / 2 * k1);
    const double k3 = f(t + h / 2, y + h / 2 * k2);
    const double k4 = f(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    t += h;
  }
  return y;
}

}  // namespace

TEST_CASE("eigenvalues and basis fields") {
  DomainConfig dom{2.0, 8, 17, 1};
  CHECK(eigenvalue(dom, 1) == doctest::Approx(kPi * kPi / 4.0).epsilon(1e-14));
  CHECK(eigenvalue(dom, 3) == doctest::Approx(9.0 * kPi * kPi / 4.0).epsilon(1e-14));
  CHECK_THROWS_AS(eigenvalue(dom, 0), std::out_of_range);
  CHECK_THROWS_AS(eigenvalue(dom, 9), std::out_of_range);
  const SpectralField e3 = SpectralField::basis(dom, 3, 2.5);
  CHECK(e3.coeffs[2] == 2.5);
  CHECK(h_norm(e3) == doctest::Approx(2.5));
}

TEST_CASE("norms of the first eigenfunction, L = 1") {
  DomainConfig dom{1.0, 4, 9, 1};
  const Norms n = norms(SpectralField::basis(dom, 1));
  CHECK(n.h == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(n.v == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(n.vstar == doctest::Approx(1.0 / kPi).epsilon(1e-14));
}

TEST_CASE("transform round trip against the direct sine sum") {
  DomainConfig dom{1.7, 6, 13, 1};
  SineTransform tr(dom);
  const SpectralField u = random_field(dom, 42);
  const auto phys = tr.to_physical(u);
  REQUIRE(static_cast<int>(phys.size()) == dom.n_quad);
  for (int k = 0; k < dom.n_quad; ++k) {
    double direct = 0.0;
    for (int i = 1; i <= dom.n_modes; ++i)
      direct += u.coeffs[i - 1] * std::sqrt(2.0 / dom.L) *
                std::sin(i * kPi * tr.node(k) / dom.L);
    CHECK(phys[k] == doctest::Approx(direct).epsilon(1e-13));
  }
  const SpectralField back = tr.from_physical(phys);
  for (int i = 0; i < dom.n_modes; ++i)
    CHECK(back.coeffs[i] == doctest::Approx(u.coeffs[i]).epsilon(1e-12));
}

TEST_CASE("discrete Parseval identity on random fields") {
  DomainConfig dom{1.0, 16, 33, 1};
  SineTransform tr(dom);
  for (int s = 0; s < 200; ++s) {
    const SpectralField u = random_field(dom, 1000 + s, 2.0);
    const double quad = tr.integrate_pointwise(u, [](double y) { return y * y; });
    const double parseval = h_norm(u) * h_norm(u);
    CHECK(quad == doctest::Approx(parseval).epsilon(1e-11));
  }
}

TEST_CASE("Poincare inequality on random fields") {
  DomainConfig dom{1.3, 12, 25, 1};
  const double lam1 = eigenvalue(dom, 1);
  for (int s = 0; s < 100; ++s) {
    const Norms n = norms(random_field(dom, 7000 + s));
    CHECK(n.v * n.v >= lam1 * n.h * n.h * (1.0 - 1e-12));
    CHECK(n.h * n.h >= lam1 * n.vstar * n.vstar * (1.0 - 1e-12));
  }
}

TEST_CASE("logarithmic Sobolev gaps are nonnegative") {
  DomainConfig dom{1.0, 16, 65, 1};
  SineTransform tr(dom);
  const std::vector<double> eps_grid = {1e-3, 1e-2, 1e-1, 1.0};
  for (int s = 0; s < 100; ++s) {
    const SpectralField u = random_field(dom, 300 + s, 3.0);
    for (double eps : eps_grid) {
      CHECK(log_sobolev_gap(tr, u, eps) >= -1e-10);
      CHECK(log_sobolev_plus_gap(tr, u, eps) >= -1e-10);
    }
  }
  CHECK_THROWS_AS(log_sobolev_gap(tr, SpectralField::zero(dom), 0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(log_sobolev_gap(tr, random_field(dom, 1), 0.0),
                  std::invalid_argument);
}

TEST_CASE("Phi against an independent Simpson oracle") {
  PhiFunction phi;
  auto integrand = [&](double x) {
    return 1.0 / (1.0 + x + x * phi.rho(x));
  };
  CHECK(phi.phi(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double z : {0.5, 1.0, 2.0, PhiFunction::rho_switch, 5.0, 20.0, 300.0}) {
    // split at the rho break so Simpson sees smooth pieces
    double ref;
    if (z <= PhiFunction::rho_switch) {
      ref = simpson(integrand, 0.0, z, 20000);
    } else {
      ref = simpson(integrand, 0.0, PhiFunction::rho_switch, 20000) +
            simpson(integrand, PhiFunction::rho_switch, z, 20000);
    }
    CHECK(phi.phi(z) == doctest::Approx(std::exp(ref)).epsilon(1e-9));
  }
}

TEST_CASE("Phi is increasing, Phi' matches finite differences, Phi concave-ish") {
  PhiFunction phi;
  double prev = phi.phi(0.0);
  for (double z = 0.25; z <= 50.0; z += 0.25) {
    const double cur = phi.phi(z);
    CHECK(cur > prev);
    prev = cur;
  }
  for (double z : {0.3, 1.0, 2.7, 3.0, 10.0}) {
    const double h = 1e-6;
    const double fd = (phi.phi(z + h) - phi.phi(z - h)) / (2 * h);
    CHECK(phi.phi_prime(z) == doctest::Approx(fd).epsilon(1e-6));
  }
  // second differences nonpositive away from zero
  for (double z = 1.0; z <= 40.0; z += 0.5) {
    const double h = 1e-3;
    const double d2 = phi.phi(z + h) - 2 * phi.phi(z) + phi.phi(z - h);
    CHECK(d2 <= 1e-9);
  }
}

TEST_CASE("path metric of a constant shift") {
  DomainConfig dom{1.0, 4, 9, 1};
  const double T = 0.8, c = 0.3;
  const int steps = 64;
  Trajectory u, v;
  for (int r = 0; r <= steps; ++r) {
    u.times.push_back(r * T / steps);
    v.times.push_back(r * T / steps);
    u.states.push_back(SpectralField::basis(dom, 1, 1.0));
    v.states.push_back(SpectralField::basis(dom, 1, 1.0 + c));
  }
  const PathMetricReport rep = path_metric(u, v, 0.0, T);
  const double lam1 = eigenvalue(dom, 1);
  CHECK(rep.sup_h == doctest::Approx(c).epsilon(1e-13));
  CHECK(rep.int_v == doctest::Approx(lam1 * c * c * T).epsilon(1e-12));
  CHECK(rep.rho == doctest::Approx(std::sqrt(c * c + lam1 * c * c * T)).epsilon(1e-12));
}

TEST_CASE("path metric against a brute-force recomputation") {
  DomainConfig dom{1.0, 6, 13, 1};
  const double T = 1.0;
  const int steps = 40;
  Trajectory u, v;
  for (int r = 0; r <= steps; ++r) {
    u.times.push_back(r * T / steps);
    v.times.push_back(r * T / steps);
    u.states.push_back(random_field(dom, 100 + r));
    v.states.push_back(random_field(dom, 900 + r));
  }
  const PathMetricReport rep = path_metric(u, v, 0.0, T);
  double sup = 0.0;
  std::vector<double> v2(steps + 1);
  for (int r = 0; r <= steps; ++r) {
    const SpectralField d = u.states[r] - v.states[r];
    sup = std::max(sup, h_norm(d));
    v2[r] = v_norm(d) * v_norm(d);
  }
  double iv = 0.0;
  for (int r = 0; r < steps; ++r) iv += 0.5 * (v2[r] + v2[r + 1]) * (T / steps);
  CHECK(rep.sup_h == doctest::Approx(sup).epsilon(1e-13));
  CHECK(rep.int_v == doctest::Approx(iv).epsilon(1e-13));
  CHECK(rep.rho == doctest::Approx(std::sqrt(sup * sup + iv)).epsilon(1e-13));
}

TEST_CASE("power Gronwall bound solves the Bernoulli extremal ODE") {
  auto a = [](double t) { return 0.4 + 0.2 * std::sin(t); };
  auto b = [](double t) { return 0.3 + 0.1 * t; };
  for (double alpha : {0.0, 0.3, 0.7}) {
    const double c = 1.5;
    const double bound = gronwall_bound_61(c, alpha, a, b, 0.0, 2.0);
    const double ode = rk4(
        [&](double t, double y) { return a(t) * y + b(t) * std::pow(y, alpha); },
        c, 0.0, 2.0, 20000);
    CHECK(bound == doctest::Approx(ode).epsilon(1e-5));
    CHECK(bound >= ode * (1.0 - 1e-6));
  }
  CHECK_THROWS_AS(gronwall_bound_61(-1.0, 0.5, a, b, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(gronwall_bound_61(1.0, 1.0, a, b, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("logarithmic Gronwall bound dominates its extremal ODE") {
  auto M = [](double) { return 2.0; };
  auto c1 = [](double t) { return 0.5 + 0.2 * t; };
  auto c2 = [](double t) { return 0.3 + 0.1 * std::cos(t); };
  for (double t : {0.5, 1.0, 2.0}) {
    const double bound = gronwall_bound_62(M, c1, c2, t);
    const double ode = rk4(
        [&](double s, double y) { return c1(s) + c2(s) * y * std::log(y); },
        M(0.0), 0.0, t, 20000);
    CHECK(bound >= ode * (1.0 - 1e-6));
    // and it is not wildly loose at desk scale
    CHECK(bound <= 50.0 * ode);
  }
  CHECK_THROWS_AS(gronwall_bound_62([](double) { return 0.5; }, c1, c2, 1.0),
                  std::invalid_argument);
}

TEST_CASE("fractional Sobolev path norm basics") {
  DomainConfig dom{1.0, 4, 9, 1};
  const int steps = 16;
  Trajectory flat;
  for (int r = 0; r <= steps; ++r) {
    flat.times.push_back(r * 0.5 / steps);
    flat.states.push_back(SpectralField::basis(dom, 2, 1.0));
  }
  // constant path: only the int ||u||_{V*}^2 dt term survives
  const double vs = vstar_norm(flat.states[0]);
  CHECK(wbeta2_norm(flat, 0.25) ==
        doctest::Approx(vs * std::sqrt(0.5)).epsilon(1e-12));
  Trajectory ramp = flat;
  for (int r = 0; r <= steps; ++r)
    ramp.states[r] = (r / static_cast<double>(steps)) * flat.states[r];
  const double n1 = wbeta2_norm(ramp, 0.25);
  CHECK(n1 > 0.0);
  Trajectory ramp2 = ramp;
  for (auto& st : ramp2.states) st = 3.0 * st;
  CHECK(wbeta2_norm(ramp2, 0.25) == doctest::Approx(3.0 * n1).epsilon(1e-12));
  CHECK_THROWS_AS(wbeta2_norm(ramp, 0.5), std::invalid_argument);
}
