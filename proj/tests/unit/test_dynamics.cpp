#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "neklab/dynamics/dynamics.hpp"
#include "neklab/errors.hpp"

using namespace neklab;
using namespace neklab::dynamics;
using core::cplx;

namespace {

using Map = std::vector<double>;

// x = (I, θ) → one or several steps, without angle reduction.
Map advance(const Stepper& st, const Map& x, double dt, std::size_t steps) {
  const std::size_t n = x.size() / 2;
  State s{Map(x.begin(), x.begin() + n), Map(x.begin() + n, x.end())};
  for (std::size_t i = 0; i < steps; ++i) st.step(s, dt);
  Map out = s.I;
  out.insert(out.end(), s.theta.begin(), s.theta.end());
  return out;
}

// max |DᵀJD − J| with D from Richardson-extrapolated central differences.
double symplectic_defect(const Stepper& st, const Map& x, double dt, std::size_t steps) {
  const std::size_t m = x.size(), n = m / 2;
  std::vector<Map> D(m, Map(m));
  const double h = 1e-4;
  for (std::size_t c = 0; c < m; ++c) {
    auto column = [&](double hh) {
      Map xp = x, xm = x;
      xp[c] += hh;
      xm[c] -= hh;
      const Map a = advance(st, xp, dt, steps), b = advance(st, xm, dt, steps);
      Map d(m);
      for (std::size_t r = 0; r < m; ++r) d[r] = (a[r] - b[r]) / (2.0 * hh);
      return d;
    };
    const Map d1 = column(h), d2 = column(2.0 * h);
    for (std::size_t r = 0; r < m; ++r) D[r][c] = (4.0 * d1[r] - d2[r]) / 3.0;
  }
  auto J = [&](std::size_t r, std::size_t c) {
    if (r < n && c == r + n) return 1.0;
    if (r >= n && c + n == r) return -1.0;
    return 0.0;
  };
  double worst = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      double v = 0.0;
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) v += D[r][a] * J(r, c) * D[c][b];
      worst = std::max(worst, std::abs(v - J(a, b)));
    }
  return worst;
}

System action_dependent_pendulum(double eps) {
  System s = benchmark_system("pendulum", 0.0);
  s.f = TrigPoly::from_polynomial(core::Polynomial::variable(1, 0)) * TrigPoly::cosine(core::MultiIndex{1}, eps);
  return s;
}

geography::Geography convex3_geography(double eps) {
  StabilityConfig cfg;
  const auto params = geography::geography_params(3, cfg.alpha, cfg.ell);
  const auto sched = geography::make_schedule(eps, cfg.eps0, params, cfg.M, cfg.prefactors);
  const System sys = benchmark_system("convex3", eps);
  const geography::Vec c = Eigen::Map<const geography::Vec>(cfg.center.data(), 3);
  return geography::Geography(sched, steepness::FrequencyMap::from_polynomial(sys.h, c, 0.5), c);
}

}  // namespace

TEST_CASE("unperturbed flow is exact") {
  const System sys = benchmark_system("convex3", 0.0);
  IntegratorSpec spec;
  spec.dt = 0.1;
  spec.t_end = 1000.0;
  spec.stride = 50;
  const State s0{{0.3, -0.2, 1.0}, {0.5, 1.0, 1.5}};
  const Trajectory tr = integrate(sys, s0, spec);
  CHECK(tr.scheme == Scheme::splitting);
  CHECK(tr.t.back() == doctest::Approx(1000.0));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(tr.I[i][j] == s0.I[j]);
      const double expect = std::fmod(s0.theta[j] + s0.I[j] * tr.t[i], 2.0 * std::numbers::pi);
      const double diff = std::remainder(tr.theta[i][j] - expect, 2.0 * std::numbers::pi);
      CHECK(std::abs(diff) < 1e-9);
      CHECK(tr.theta[i][j] >= 0.0);
      CHECK(tr.theta[i][j] < 2.0 * std::numbers::pi);
    }
  }
  CHECK(max_drift(tr, tr.t.back()) == 0.0);
  CHECK(tr.energy_error() < 1e-14);
}

TEST_CASE("splitting energy error is second order in dt") {
  const System sys = benchmark_system("pendulum", 0.1);
  double e[2];
  int i = 0;
  for (double dt : {0.1, 0.05}) {
    IntegratorSpec spec;
    spec.dt = dt;
    spec.t_end = 100.0;
    spec.stride = 1;
    e[i++] = integrate(sys, State{{1.0}, {0.3}}, spec).energy_error();
  }
  CHECK(e[0] / e[1] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("implicit midpoint is second order and conserves energy to high accuracy") {
  const System sys = action_dependent_pendulum(0.1);
  double e[2];
  int i = 0;
  for (double dt : {0.1, 0.05}) {
    IntegratorSpec spec;
    spec.dt = dt;
    spec.t_end = 50.0;
    spec.stride = 1;
    const Trajectory tr = integrate(sys, State{{1.0}, {0.3}}, spec);
    CHECK(tr.scheme == Scheme::implicit_midpoint);
    e[i++] = tr.energy_error();
  }
  CHECK(e[0] < 1e-2);
  CHECK(e[0] / e[1] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("channel drifts linearly along (-1, 1)") {
  for (double eps : {1e-2, 1e-3}) {
    const System sys = benchmark_system("channel", eps);
    IntegratorSpec spec;
    spec.dt = 1.0;
    spec.t_end = 1e3 / eps;
    spec.stride = 997;
    const Trajectory tr = integrate(sys, State{{0.0, 0.0}, {0.0, 0.0}}, spec);
    for (std::size_t i = 1; i < tr.size(); ++i) {
      const double want = eps * tr.t[i];
      CHECK(std::abs(tr.I[i][0] + want) <= 0.01 * want);
      CHECK(std::abs(tr.I[i][1] - want) <= 0.01 * want);
    }
  }
}

TEST_CASE("max_drift is monotone in the horizon") {
  const System sys = benchmark_system("convex3", 1e-2);
  IntegratorSpec spec;
  spec.t_end = 2000.0;
  spec.stride = 10;
  const Trajectory tr = integrate(sys, State{{0.05, -0.03, 1.0}, {0.1, 0.2, 0.3}}, spec);
  double prev = 0.0;
  for (double T = 0.0; T <= 2000.0; T += 50.0) {
    const double d = max_drift(tr, T);
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(prev > 0.0);
  CHECK_THROWS_AS(max_drift(tr, 5000.0), DomainError);
}

TEST_CASE("splitting is symplectic and reversible") {
  const System sys = benchmark_system("convex3", 1e-2);
  IntegratorSpec spec;
  const Stepper st(sys, spec);
  const Map x{0.2, -0.1, 1.0, 0.4, 2.0, 5.0};
  CHECK(symplectic_defect(st, x, 0.05, 20) <= 1e-10);

  const Map fwd = advance(st, x, 0.05, 1000);
  const Map back = advance(st, fwd, -0.05, 1000);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-9);
}

TEST_CASE("implicit midpoint is symplectic") {
  const System sys = action_dependent_pendulum(0.1);
  IntegratorSpec spec;
  const Stepper st(sys, spec);
  CHECK(st.scheme() == Scheme::implicit_midpoint);
  CHECK(symplectic_defect(st, Map{1.0, 0.3}, 0.05, 20) <= 1e-6);
}

TEST_CASE("scheme selection and refusals") {
  IntegratorSpec spec;
  spec.scheme = Scheme::splitting;
  CHECK_THROWS_AS(Stepper(action_dependent_pendulum(0.1), spec), DomainError);
  CHECK(scheme_from_name(scheme_name(Scheme::implicit_midpoint)) == Scheme::implicit_midpoint);
  CHECK_THROWS_AS(scheme_from_name("leapfrog"), DomainError);
  CHECK_THROWS_AS(benchmark_system("kepler", 0.1), DomainError);
  spec.dt = 0.0;
  CHECK_THROWS_AS(spec.validate(), DomainError);

  spec = IntegratorSpec{};
  spec.max_iterations = 1;
  spec.dt = 0.5;
  spec.scheme = Scheme::implicit_midpoint;
  CHECK_THROWS_AS(integrate(action_dependent_pendulum(0.5), State{{1.0}, {0.3}}, spec), IntegrationError);
}

TEST_CASE("integration stops at the action bound") {
  const System sys = benchmark_system("channel", 0.1);
  IntegratorSpec spec;
  spec.dt = 0.5;
  spec.t_end = 1000.0;
  spec.action_bound = 2.0;
  const Trajectory tr = integrate(sys, State{{0.0, 0.0}, {0.0, 0.0}}, spec);
  CHECK(tr.exited);
  CHECK(tr.exit_time == doctest::Approx(20.5));
  CHECK(tr.t.back() == tr.exit_time);
}

TEST_CASE("exponent fits recover synthetic power laws") {
  std::vector<double> eps, a, b;
  for (double e = -2.0; e >= -6.0; e -= 0.5) {
    const double x = std::pow(10.0, e);
    eps.push_back(x);
    a.push_back(3.0 * std::pow(x, 1.0 / 6.0));
    b.push_back(0.7 / (x * std::pow(std::abs(std::log(x)), 3.0)));
  }
  const ExponentFit fa = fit_exponents(eps, a);
  CHECK(std::abs(fa.slope - 1.0 / 6.0) < 1e-12);
  CHECK(fa.slope_low <= fa.slope);
  CHECK(fa.slope_high >= fa.slope);
  const ExponentFit fb = fit_exponents(eps, b, 4.0);
  CHECK(std::abs(fb.slope + 1.0) < 1e-6);
  CHECK(std::exp(fb.intercept) == doctest::Approx(0.7).epsilon(1e-6));

  CHECK_THROWS_AS(fit_exponents({1e-2, 1e-3, 1e-4}, {1.0, 2.0, 3.0}), DomainError);
  CHECK_THROWS_AS(fit_exponents({1e-2, 2e-2, 4e-2, 8e-2}, {1.0, 2.0, 3.0, 4.0}), DomainError);
}

TEST_CASE("block itinerary partitions the time span") {
  const auto geo = convex3_geography(1e-3);
  const System sys = benchmark_system("convex3", 1e-3);
  IntegratorSpec spec;
  spec.t_end = 5000.0;
  spec.stride = 20;
  const Trajectory tr = integrate(sys, State{{0.02, 0.01, 1.0}, {0.1, 0.2, 0.3}}, spec);
  const auto it = block_itinerary(tr, geo);
  REQUIRE(!it.empty());
  CHECK(it.front().t_begin == tr.t.front());
  CHECK(it.back().t_end == tr.t.back());
  for (std::size_t i = 0; i + 1 < it.size(); ++i) {
    CHECK(it[i].t_end == it[i + 1].t_begin);
    CHECK(it[i].t_begin <= it[i].t_end);
  }

  const System free = benchmark_system("convex3", 0.0);
  const Trajectory still = integrate(free, State{{0.02, 0.01, 1.0}, {0.1, 0.2, 0.3}}, spec);
  const auto one = block_itinerary(still, geo);
  REQUIRE(one.size() == 1);
  CHECK_FALSE(one.front().outside);
  CHECK(!escape_time(still, one.front().block.lattice_id, geo).has_value());
}

TEST_CASE("initial conditions are seeded and inside the ball") {
  const std::vector<double> c{0.0, 0.0, 1.0};
  const auto a = initial_conditions(c, 0.1, 8, 7);
  const auto b = initial_conditions(c, 0.1, 8, 7);
  const auto d = initial_conditions(c, 0.1, 8, 8);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].I == b[i].I);
    CHECK(a[i].theta == b[i].theta);
    double r = 0.0;
    for (std::size_t j = 0; j < 3; ++j) r += (a[i].I[j] - c[j]) * (a[i].I[j] - c[j]);
    CHECK(std::sqrt(r) <= 0.1);
  }
  CHECK(a[0].I != d[0].I);
}

TEST_CASE("CSV headers and deterministic output") {
  const System sys = benchmark_system("convex3", 1e-2);
  IntegratorSpec spec;
  spec.t_end = 10.0;
  spec.stride = 10;
  std::ostringstream a, b;
  integrate(sys, State{{0.0, 0.0, 1.0}, {0.1, 0.2, 0.3}}, spec).write_csv(a);
  integrate(sys, State{{0.0, 0.0, 1.0}, {0.1, 0.2, 0.3}}, spec).write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("t,I1,I2,I3,theta1,theta2,theta3,H\n", 0) == 0);

  StabilityConfig cfg;
  cfg.max_steps = 2000;
  cfg.initial_conditions = 3;
  cfg.itineraries = false;
  const DriftReport r1 = stability_sweep(cfg);
  cfg.threads = 3;
  const DriftReport r2 = stability_sweep(cfg);
  CHECK(r1.to_json().dump() == r2.to_json().dump());
  for (const auto& r : r1.records) {
    CHECK(r.truncated);
    CHECK(r.horizon == doctest::Approx(100.0));
  }
  CHECK(r1.C_ratio >= 1.0);
  std::ostringstream csv;
  r1.write_csv(csv);
  CHECK(csv.str().rfind("epsilon,horizon,max_drift,escape_time,itinerary_len\n", 0) == 0);

  cfg.eps.clear();
  CHECK_THROWS_AS(stability_sweep(cfg), DomainError);
}
