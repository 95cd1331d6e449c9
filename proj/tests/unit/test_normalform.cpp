#include <doctest.h>

#include <cmath>
#include <numbers>

#include "neklab/errors.hpp"
#include "neklab/normalform/normalform.hpp"

using namespace neklab;
using namespace neklab::normalform;
using core::cplx;

namespace {

double coeff_at(const TrigPoly& g, const MultiIndex& k, std::vector<double> I) {
  const Polynomial* p = g.coefficient(k);
  return p ? p->evaluate(std::span<const double>(I)).real() : 0.0;
}

double raw_amplitude(const Benchmark& b) {
  // Largest constant coefficient among the harmonics of f, times 2.
  double a = 0.0;
  for (const auto& [k, p] : b.f.terms()) a = std::max(a, 2.0 * std::abs(p.constant_term()));
  return a;
}

Thresholds sample_thresholds() {
  Thresholds t;
  t.eps = 1e-4;
  t.alpha = 1.0;
  t.rho = 0.5;
  t.rho_p = 0.25;
  t.sigma = 3.0;
  t.K = 2.0;
  t.xi = 1.0;
  t.M = 1.0;
  return t;
}

}  // namespace

TEST_CASE("threshold margins match their closed forms") {
  const Thresholds t = sample_thresholds();
  const auto r = check_thresholds(t);
  CHECK(r.eps_margin == doctest::Approx(0.25 / 512.0 / 1e-4));
  CHECK(r.rho_margin == doctest::Approx(std::min(0.5, 1.0 / 4.0) / 0.25));
  CHECK(r.ksigma_margin == doctest::Approx(1.0));
  CHECK(r.pass);

  Thresholds big = t;
  big.eps = 2.0 * t.eps;
  CHECK(check_thresholds(big).eps_margin == doctest::Approx(r.eps_margin / 2.0));
  big.sigma = 2.0;
  CHECK_FALSE(check_thresholds(big).pass);

  Thresholds zero = t;
  zero.eps = 0.0;
  CHECK(std::isinf(check_thresholds(zero).eps_margin));

  Thresholds bad = t;
  bad.K = 0.5;
  CHECK_THROWS_AS(check_thresholds(bad), DomainError);
}

TEST_CASE("schedule values through the thresholds") {
  const auto params = geography::geography_params(3, {1.0, 1.0}, 4.0);
  // At ε/ε₀ = e⁻⁶ the cutoff is K = e and s ≤ 1, so Kσ cannot reach 6.
  for (double c_s : {0.01, 0.1, 1.0, 10.0}) {
    geography::Prefactors pre;
    pre.c_s = c_s;
    const auto sched = geography::make_schedule(std::exp(-6.0), 1.0, params, 1.0, pre);
    CHECK(sched.K == doctest::Approx(std::numbers::e));
    const auto r = check_thresholds(thresholds_from_schedule(sched, 0.5, 1.01));
    CHECK(r.ksigma_margin <= std::numbers::e / 6.0 + 1e-12);
    CHECK_FALSE(r.pass);
  }
  // Further in, with ε₀ small, every margin clears 1.
  geography::Prefactors pre;
  pre.c_s = 0.1;
  const double eps0 = 0.05;
  const auto sched = geography::make_schedule(eps0 * std::exp(-12.0), eps0, params, 1.0, pre);
  const Thresholds t = thresholds_from_schedule(sched, 0.5, 1.01);
  CHECK(t.rho_p == doctest::Approx(sched.r));
  CHECK(t.sigma == doctest::Approx(sched.s));
  const auto r = check_thresholds(t);
  CHECK(r.eps_margin >= 1.0);
  CHECK(r.rho_margin >= 1.0);
  CHECK(r.ksigma_margin >= 1.0);
  CHECK(r.pass);
}

TEST_CASE("resonant projection keeps exactly the lattice harmonics below the cutoff") {
  const auto L = Lattice::saturate(2, {{1, -1}}, 3.0);
  TrigPoly f(2);
  for (int a = -3; a <= 3; ++a)
    for (int b = -3; b <= 3; ++b) f.add(MultiIndex{a, b}, Polynomial::constant(2, 1.0 + a * a + b * b));
  const auto g = project_resonant(f, L, 3.0);
  for (const auto& [k, p] : f.terms()) {
    const bool keep = k[0] == -k[1] && std::abs(k[0]) + std::abs(k[1]) <= 3;
    CHECK((g.coefficient(k) != nullptr) == keep);
  }
  CHECK(g.size() == 3);  // 0, ±(1, −1)
  const auto z = project_resonant(f, Lattice::trivial(2), 10.0);
  CHECK(z.size() == 1);
  CHECK(project_cutoff(f, 1.0).size() == 5);
}

TEST_CASE("homological equation with constant frequencies is solved exactly") {
  // h = 2 I₁ + 3 I₂, f = cos θ₁ + I₁ sin(θ₁ + θ₂).
  const Polynomial h = Polynomial::variable(2, 0) * cplx(2.0) + Polynomial::variable(2, 1) * cplx(3.0);
  TrigPoly f = TrigPoly::cosine(MultiIndex{1, 0});
  TrigPoly s = TrigPoly::sine(MultiIndex{1, 1});
  f += s * TrigPoly::from_polynomial(Polynomial::variable(2, 0));
  const DomainSpec dom{0.2, 0.1, 1.0, {1.0, 1.0}};
  const auto hom = solve_homological(h, f, Lattice::trivial(2), 2.0, dom, 1.0);
  CHECK(hom.exact);
  CHECK(hom.fit_residual == 0.0);
  const TrigPoly back = poisson_bracket(TrigPoly::from_polynomial(h), hom.chi) - f;
  CHECK(back.coefficient_l1() < 1e-14);
  CHECK(hom.chi.is_real());
}

TEST_CASE("homological fit reproduces the pendulum generator") {
  const auto b = benchmark("pendulum1");
  const double eps = raw_amplitude(b);
  const auto hom = solve_homological(b.h, b.f, b.lattice, b.thresholds.K,
                                     DomainSpec{b.domain.radius, b.thresholds.rho, b.thresholds.sigma, b.domain.center},
                                     b.thresholds.alpha);
  CHECK_FALSE(hom.exact);
  CHECK(hom.fit_residual < 1e-6);
  for (double I : {1.25, 1.4, 1.5, 1.6, 1.75})
    for (double th : {0.3, 1.2, 2.9}) {
      std::vector<double> a{I}, t{th};
      CHECK(hom.chi.evaluate(a, t) == doctest::Approx(eps / I * std::sin(th)).epsilon(1e-6));
    }
}

TEST_CASE("homological solver rejects resonant harmonics and small divisors") {
  const auto b = benchmark("resonant2");
  CHECK_THROWS_AS(solve_homological(b.h, b.f, b.lattice, 2.0, b.domain, 0.5), DomainError);
  TrigPoly far = TrigPoly::cosine(MultiIndex{3, 0});
  CHECK_THROWS_AS(solve_homological(b.h, far, b.lattice, 2.0, b.domain, 0.5), DomainError);
  // ω = I vanishes near the origin.
  const Polynomial h = Polynomial::variable(1, 0).pow(2) * cplx(0.5);
  const DomainSpec dom{0.5, 0.1, 1.0, {0.2}};
  try {
    solve_homological(h, TrigPoly::cosine(MultiIndex{1}), Lattice::trivial(1), 1.0, dom, 0.1);
    FAIL("expected SmallDivisorError");
  } catch (const SmallDivisorError& e) {
    CHECK(std::string(e.what()).find("k = ") != std::string::npos);
  }
}

TEST_CASE("pendulum normal form matches the second-order averages") {
  const auto b = benchmark("pendulum1");
  const double eps = raw_amplitude(b);
  const auto r = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
  CHECK(r.generators.size() == 1);
  CHECK(r.g.size() == 1);
  for (double I : {1.25, 1.5, 1.75}) {
    const double avg = eps * eps / (4.0 * I * I);
    CHECK(coeff_at(r.g, MultiIndex{0}, {I}) == doctest::Approx(avg).epsilon(1e-6));
    CHECK(coeff_at(r.f_star, MultiIndex{2}, {I}) == doctest::Approx(-avg / 2.0).epsilon(1e-6));
    CHECK(std::abs(coeff_at(r.f_star, MultiIndex{1}, {I})) < 1e-6 * eps);
  }
  const auto& d = r.diagnostics;
  CHECK(d.eps_measured == doctest::Approx(b.thresholds.eps));
  CHECK(d.remainder_norm <= d.remainder_bound);
  CHECK(d.g_distance <= d.g_bound);
  CHECK(d.step_norms.size() == 2);
  CHECK(d.step_norms[1] < 1e-3 * d.step_norms[0]);
}

TEST_CASE("two-action normal form keeps the resonant harmonic") {
  const auto b = benchmark("resonant2");
  const double eps = raw_amplitude(b);
  const auto r = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
  for (const auto& I : {std::vector<double>{1.0, 1.0}, std::vector<double>{1.1, 0.9}, std::vector<double>{0.85, 1.15}}) {
    CHECK(coeff_at(r.g, MultiIndex{1, -1}, I) == doctest::Approx(eps / 2.0).epsilon(1e-9));
    CHECK(coeff_at(r.g, MultiIndex{0, 0}, I) == doctest::Approx(eps * eps / (4.0 * I[0] * I[0])).epsilon(1e-5));
    CHECK(std::abs(coeff_at(r.f_star, MultiIndex{1, 0}, I)) < 1e-5 * eps);
  }
  for (const auto& [k, p] : r.g.terms()) CHECK(in_lattice(k, b.lattice));
  for (const auto& k : r.diagnostics.remainder_support)
    CHECK((!in_lattice(k, b.lattice) || k.l1() > 2));
}

TEST_CASE("resonant part is quadratic in the perturbation") {
  for (const char* name : {"pendulum1", "resonant2"}) {
    CAPTURE(name);
    const auto full = benchmark(name, 0.5);
    const auto half = benchmark(name, 0.25);
    const auto r1 = normalize(full.h, full.f, full.lattice, full.thresholds, full.domain);
    const auto r2 = normalize(half.h, half.f, half.lattice, half.thresholds, half.domain);
    const double ratio = r1.diagnostics.g_distance / r2.diagnostics.g_distance;
    CHECK(ratio >= 3.5);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.01));
    CHECK(r1.diagnostics.remainder_factor <= 10.0);
  }
}

TEST_CASE("verification of the transformation") {
  for (const char* name : {"pendulum1", "resonant2"}) {
    CAPTURE(name);
    const auto b = benchmark(name);
    const auto r = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
    const auto v = verify_normalform(r, b.h, b.f, b.lattice, b.thresholds, b.domain, 12, 7);
    CHECK(v.energy_defect < 1e-12);
    CHECK(v.action_ratio <= v.action_bound);
    CHECK(v.angle_ratio <= v.angle_bound);
    CHECK(v.action_ratio > 0.0);
    CHECK(v.symplectic_defect <= 1e-6);
    CHECK(v.support_exact);
    CHECK(v.commutation_defect < 1e-18);
    const auto again = verify_normalform(r, b.h, b.f, b.lattice, b.thresholds, b.domain, 12, 7);
    CHECK(again.to_json().dump() == v.to_json().dump());
  }
}

TEST_CASE("transform composes the flows right to left") {
  // χ₁ = I shifts θ by 1; χ₂ = cos θ shifts I by sin θ.
  const TrigPoly shift = TrigPoly::from_polynomial(Polynomial::variable(1, 0));
  const TrigPoly kick = TrigPoly::cosine(MultiIndex{1});
  const Transform psi({shift, kick}, 32);
  std::vector<double> I{0.3}, th{0.7};
  psi.apply(I, th);
  CHECK(I[0] == doctest::Approx(0.3 + std::sin(0.7)).epsilon(1e-12));
  CHECK(th[0] == doctest::Approx(1.7).epsilon(1e-12));

  const Transform none({});
  std::vector<double> a{1.0}, t{2.0};
  none.apply(a, t);
  CHECK(a[0] == 1.0);
  CHECK(t[0] == 2.0);
  CHECK_THROWS_AS(Transform({shift}, 0), DomainError);
}

TEST_CASE("composition identity holds exactly") {
  const auto b = benchmark("resonant2");
  const auto r = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
  const Transform psi(r.generators);
  const TrigPoly H = TrigPoly::from_polynomial(b.h) + b.f;
  const TrigPoly Hs = TrigPoly::from_polynomial(b.h) + r.g;
  const PhaseFunction fH = [&](const std::vector<double>& I, const std::vector<double>& t) { return H.evaluate(I, t); };
  const PhaseFunction fS = [&](const std::vector<double>& I, const std::vector<double>& t) { return Hs.evaluate(I, t); };
  CHECK(composition_identity_defect(fH, fS, psi, b.domain, 20, 3) == 0.0);
}

TEST_CASE("normalize refuses inputs outside the thresholds") {
  auto b = benchmark("pendulum1");
  Thresholds loose = b.thresholds;
  loose.sigma = 2.0;  // Kσ < 6
  CHECK_THROWS_AS(normalize(b.h, b.f, b.lattice, loose, b.domain), DomainError);
  const TrigPoly big = b.f * cplx(3.0);
  CHECK_THROWS_AS(normalize(b.h, big, b.lattice, b.thresholds, b.domain), DomainError);
  NormalizeOptions opt;
  opt.lie_order = 0;
  CHECK_THROWS_AS(normalize(b.h, b.f, b.lattice, b.thresholds, b.domain, opt), DomainError);
  CHECK_THROWS_AS(benchmark("unknown"), DomainError);
}

TEST_CASE("iteration stops at the fit residual floor") {
  const auto b = benchmark("pendulum1");
  NormalizeOptions opt;
  opt.steps = 3;
  const auto r = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain, opt);
  CHECK(r.diagnostics.stalled);
  CHECK(r.generators.size() == 1);
  const auto one = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
  CHECK_FALSE(one.diagnostics.stalled);
  CHECK(r.to_json()["g"] == one.to_json()["g"]);
}

TEST_CASE("exact divisions keep reducing the non-resonant part") {
  // Constant frequencies (2, 3): every step divides exactly and gains a factor ε.
  const Polynomial h = Polynomial::variable(2, 0) * cplx(2.0) + Polynomial::variable(2, 1) * cplx(3.0);
  TrigPoly f = TrigPoly::cosine(MultiIndex{1, 0}, 1e-3);
  f += TrigPoly::cosine(MultiIndex{0, 1}, 1e-3) * TrigPoly::from_polynomial(Polynomial::variable(2, 0));
  Thresholds t;
  t.eps = 1.0;
  t.alpha = 1.0;
  t.rho = t.rho_p = 0.1;
  t.sigma = 1.0;
  t.K = 3.0;
  t.M = 1.0;
  NormalizeOptions opt;
  opt.steps = 3;
  opt.enforce_thresholds = false;
  const DomainSpec dom{0.2, 0.1, 1.0, {1.0, 1.0}};
  const auto r = normalize(h, f, Lattice::trivial(2), t, dom, opt);
  const auto& s = r.diagnostics.step_norms;
  REQUIRE(s.size() == 4);
  CHECK(s[1] < 1e-2 * s[0]);
  CHECK(s[2] < 1e-2 * s[1]);
  CHECK(s[3] < 1e-2 * s[2]);
  for (double fr : r.diagnostics.fit_residuals) CHECK(fr == 0.0);
}

TEST_CASE("large perturbations are reported as divergence") {
  auto b = benchmark("pendulum1");
  NormalizeOptions opt;
  opt.enforce_thresholds = false;
  opt.steps = 3;
  const TrigPoly big = b.f * cplx(2e5);
  CHECK_THROWS_AS(normalize(b.h, big, b.lattice, b.thresholds, b.domain, opt), DivergenceError);
}

TEST_CASE("normal form JSON is deterministic") {
  const auto b = benchmark("pendulum1");
  const auto r1 = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
  const auto r2 = normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
  const auto j = r1.to_json();
  CHECK(j.dump() == r2.to_json().dump());
  CHECK(j.contains("g"));
  CHECK(j.contains("f_star"));
  CHECK(j["diagnostics"]["thresholds"]["pass"].get<bool>());
  CHECK(j["diagnostics"]["remainder_support"].size() == r1.diagnostics.remainder_support.size());
}
