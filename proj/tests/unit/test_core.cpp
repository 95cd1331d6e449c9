#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "neklab/core/fourier.hpp"
#include "neklab/core/grid_function.hpp"
#include "neklab/core/io.hpp"
#include "neklab/core/multi_index.hpp"
#include "neklab/core/norms.hpp"
#include "neklab/core/polynomial.hpp"
#include "neklab/core/trig_poly.hpp"
#include "neklab/errors.hpp"

using namespace neklab;
using namespace neklab::core;
constexpr double kPi = std::numbers::pi;

namespace {

// Real trigonometric polynomial with polynomial coefficients, built from
// a_k(I) cos(k·θ) + b_k(I) sin(k·θ) so that an independent evaluator exists.
struct RealSeries {
  std::size_t n;
  struct Term {
    MultiIndex k;
    std::vector<int> powers;
    double a, b;
  };
  std::vector<Term> terms;

  double eval(std::span<const double> I, std::span<const double> th) const {
    double s = 0.0;
    for (const auto& t : terms) {
      double mono = 1.0;
      for (std::size_t j = 0; j < n; ++j) mono *= std::pow(I[j], t.powers[j]);
      const double ph = t.k.dot(th);
      s += mono * (t.a * std::cos(ph) + t.b * std::sin(ph));
    }
    return s;
  }

  TrigPoly to_trig() const {
    TrigPoly g(n);
    for (const auto& t : terms) {
      Polynomial m(n);
      m.add_term(t.powers, 1.0);
      TrigPoly c = TrigPoly::cosine(t.k, t.a) + TrigPoly::sine(t.k, t.b);
      g += c * TrigPoly::from_polynomial(m);
    }
    return g;
  }
};

RealSeries random_series(std::mt19937_64& rng, std::size_t n, int l1_order, int max_deg, int count) {
  std::uniform_int_distribution<int> kd(-l1_order, l1_order), dd(0, max_deg);
  std::uniform_real_distribution<double> cd(-1.0, 1.0);
  RealSeries s{n, {}};
  while (static_cast<int>(s.terms.size()) < count) {
    std::vector<int> k(n), p(n);
    long l1 = 0;
    for (std::size_t j = 0; j < n; ++j) {
      k[j] = kd(rng);
      l1 += std::abs(k[j]);
      p[j] = dd(rng);
    }
    if (l1 > l1_order) continue;
    s.terms.push_back({MultiIndex(k), p, cd(rng), cd(rng)});
  }
  return s;
}

TrigPoly random_trig(std::mt19937_64& rng, std::size_t n, int order = 3, int deg = 2, int count = 6) {
  return random_series(rng, n, order, deg, count).to_trig();
}

}  // namespace

TEST_CASE("multi-index norms") {
  MultiIndex k{3, -4, 0};
  CHECK(k.l1() == 7);
  CHECK(k.linf() == 4);
  CHECK(k.l2() == doctest::Approx(5.0));
  CHECK((-k)[1] == 4);
  CHECK(box_indices(2, 1).size() == 9);
  CHECK(l1_ball_indices(2, 1).size() == 5);
  CHECK(l1_ball_indices(3, 2).size() == 25);
}

TEST_CASE("polynomial arithmetic and exact division") {
  const auto x = Polynomial::variable(2, 0);
  const auto y = Polynomial::variable(2, 1);
  const auto p = (x + y) * (x - y);
  const double I[2] = {3.0, 2.0};
  CHECK(p.evaluate(std::span<const double>(I)).real() == doctest::Approx(5.0));
  CHECK(p.derivative(0) == x * cplx(2.0));
  Polynomial q;
  REQUIRE(divide_exact(p, x - y, q));
  CHECK(q == x + y);
  CHECK_FALSE(divide_exact(x, y, q));
  CHECK(x.pow(3).degree() == 3);
}

TEST_CASE("evaluate matches naive summation and stays real") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_series(rng, 3, 4, 2, 8);
    const auto g = s.to_trig();
    CHECK(g.is_real());
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int p = 0; p < 10; ++p) {
      double I[3], th[3];
      for (int j = 0; j < 3; ++j) {
        I[j] = u(rng);
        th[j] = 3.0 * u(rng);
      }
      const cplx z = g.evaluate_raw(I, th);
      CHECK(std::abs(z.real() - s.eval(I, th)) < 1e-12 * std::max(1.0, g.coefficient_l1()) * 20);
      CHECK(std::abs(z.imag()) < 1e-12 * g.coefficient_l1() * 20);
    }
  }
  const auto c = TrigPoly::cosine(MultiIndex{1});
  const double zero[1] = {0.0}, half[1] = {kPi / 2};
  CHECK(c.evaluate(zero, zero) == 1.0);
  CHECK(std::abs(c.evaluate(zero, half)) < 1e-15);
  const double two[2] = {0.0, 0.0};
  CHECK_THROWS_AS(c.evaluate(two, zero), DomainError);
}

TEST_CASE("poisson bracket examples and identities") {
  const auto h1 = TrigPoly::from_polynomial(Polynomial::variable(1, 0));
  const auto e = TrigPoly::harmonic(MultiIndex{1}, Polynomial::constant(1, 1.0));
  CHECK(poisson_bracket(h1, e) == e * cplx(0.0, 1.0));

  const auto I1 = Polynomial::variable(2, 0), I2 = Polynomial::variable(2, 1);
  const auto h = TrigPoly::from_polynomial((I1 * I1 + I2 * I2) * cplx(0.5));
  const auto g = TrigPoly::cosine(MultiIndex{1, -1});
  const auto expected = TrigPoly::sine(MultiIndex{1, -1}) * TrigPoly::from_polynomial(-(I1 - I2));
  CHECK((poisson_bracket(h, g) - expected).pruned(1e-14).is_zero());

  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const auto F = random_trig(rng, 2), G = random_trig(rng, 2), H = random_trig(rng, 2);
    CHECK(poisson_bracket(F, F).pruned(1e-12).is_zero());
    CHECK((poisson_bracket(F, G) + poisson_bracket(G, F)).pruned(1e-12).is_zero());
    const auto lhs = poisson_bracket(F, G * H);
    const auto rhs = poisson_bracket(F, G) * H + G * poisson_bracket(F, H);
    CHECK((lhs - rhs).pruned(1e-10).is_zero());
    const auto jac = poisson_bracket(F, poisson_bracket(G, H)) + poisson_bracket(G, poisson_bracket(H, F)) +
                     poisson_bracket(H, poisson_bracket(F, G));
    CHECK(jac.pruned(1e-9).is_zero());
  }
  CHECK_THROWS_AS(poisson_bracket(h1, h), DomainError);
}

TEST_CASE("fourier coefficients of simple signals") {
  auto cos1 = GridFunction::sample({Axis::angle(16)}, [](auto x) { return std::cos(x[0]); });
  auto c = fourier_coefficients(cos1, 1, 4);
  CHECK(std::abs(c.at(MultiIndex{1}) - 0.5) < 1e-15);
  CHECK(std::abs(c.at(MultiIndex{-1}) - 0.5) < 1e-15);
  CHECK(std::abs(c.at(MultiIndex{0})) < 1e-15);
  CHECK(std::abs(c.at(MultiIndex{2})) < 1e-15);

  auto three = GridFunction::sample({Axis::angle(8)}, [](auto) { return 3.0; });
  CHECK(std::abs(fourier_coefficients(three, 1, 2).at(MultiIndex{0}) - 3.0) < 1e-15);

  auto prod = GridFunction::sample({Axis::angle(16), Axis::angle(16)},
                                   [](auto x) { return std::sin(x[0]) * std::cos(x[1]); });
  auto cp = fourier_coefficients(prod, 2, 3);
  CHECK(std::abs(cp.at(MultiIndex{1, 1}) - cplx(0, -0.25)) < 1e-15);
  CHECK(std::abs(cp.at(MultiIndex{1, -1}) - cplx(0, -0.25)) < 1e-15);
  CHECK(std::abs(cp.at(MultiIndex{-1, 1}) - cplx(0, 0.25)) < 1e-15);
  CHECK(std::abs(cp.at(MultiIndex{-1, -1}) - cplx(0, 0.25)) < 1e-15);
  // Quadrature cross-check at a shifted grid origin.
  auto shifted = GridFunction::sample({Axis{-kPi, kPi, 32, true}}, [](auto x) { return std::sin(2 * x[0]); });
  CHECK(std::abs(fourier_coefficients(shifted, 1, 3).at(MultiIndex{2}) - cplx(0, -0.5)) < 1e-14);

  CHECK_THROWS_AS(fourier_coefficients(cos1, 1, 8), ResolutionError);
  auto nonper = GridFunction::sample({Axis::interval(0, 2 * kPi, 16)}, [](auto x) { return x[0]; });
  CHECK_THROWS_AS(fourier_coefficients(nonper, 1, 2), DomainError);
}

TEST_CASE("fourier reconstruction of band-limited samples") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const auto s = random_series(rng, 2, 5, 0, 10);
    const auto g = s.to_trig();
    auto f = GridFunction::sample({Axis::angle(16), Axis::angle(16)}, [&](auto th) {
      const double I[2] = {0, 0};
      return s.eval(I, th);
    });
    const auto c = fourier_coefficients(f, 2, 5);
    const auto tp = c.to_trig_poly(1e-14);
    const double I[2] = {0, 0};
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(tp.evaluate(I, f.coords(i)) - f[i]));
    CHECK(err < 1e-10);
    CHECK(tp.is_real(1e-12));
    const auto back = synthesize(c, f.axes());
    double err2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err2 = std::max(err2, std::abs(back[i] - f[i]));
    CHECK(err2 < 1e-10);
  }
  // Action-dependent coefficients are recovered per action node.
  auto f = GridFunction::sample({Axis::interval(0, 1, 5), Axis::angle(8)},
                                [](auto x) { return x[0] * x[0] * std::cos(x[1]); });
  const auto c = fourier_coefficients(f, 1, 2);
  for (std::size_t a = 0; a < 5; ++a) {
    const double I = c.action_coords(a)[0];
    CHECK(std::abs(c.at(MultiIndex{1}, a) - 0.5 * I * I) < 1e-15);
  }
}

TEST_CASE("weighted fourier norm") {
  DomainSpec dom{1.0, 0.0, 0.0, {0.0}};
  const auto c = TrigPoly::cosine(MultiIndex{1});
  CHECK(weighted_fourier_norm(c, dom, 0.0) == doctest::Approx(1.0));
  CHECK(weighted_fourier_norm(c, dom, std::log(2.0)) == doctest::Approx(2.0));
  ActionProbes empty;
  CHECK_THROWS_AS(weighted_fourier_norm(c, empty, 0.0), DomainError);

  // |g|_{r,s} ≤ ‖g‖_{r,s} ≤ cothⁿ(σ)|g|_{r,s+σ} at shared action probes.
  std::mt19937_64 rng(5);
  const double sigma = 0.5;
  for (std::size_t n : {1u, 2u}) {
    for (int t = 0; t < 6; ++t) {
      const auto g = random_trig(rng, n, 4, 1, 6);
      DomainSpec d{0.5, 0.1, 0.0, std::vector<double>(n, 1.0)};
      const auto probes = action_probes(d, n == 1 ? 5 : 3);
      for (double s : {0.0, 0.3}) {
        const double sup = strip_sup_norm(g, probes, s, 64);
        const double wf = weighted_fourier_norm(g, probes, s);
        const double wider = strip_sup_norm(g, probes, s + sigma, 64);
        CHECK(sup <= wf * (1 + 1e-12));
        CHECK(wf <= std::pow(1.0 / std::tanh(sigma), static_cast<double>(n)) * wider);
      }
    }
  }
}

TEST_CASE("holder norm examples") {
  auto c = GridFunction::sample({Axis::interval(-1, 1, 21)}, [](auto) { return -2.5; });
  CHECK(holder_norm_estimate(c, 0.5).value == doctest::Approx(2.5));
  CHECK(holder_norm_estimate(c, 2.0).value == doctest::Approx(2.5));
  CHECK_THROWS_AS(holder_norm_estimate(c, 0.0), DomainError);
  auto tiny = GridFunction::sample({Axis::interval(-1, 1, 3)}, [](auto) { return 1.0; });
  CHECK_THROWS_AS(holder_norm_estimate(tiny, 2.0), ResolutionError);

  auto cs = GridFunction::sample({Axis::angle(1024)}, [](auto x) { return std::cos(x[0]); });
  const auto r = holder_norm_estimate(cs, 1.0);
  CHECK(std::abs(r.value - 1.0) < 1e-4);
  CHECK(r.resolution == 1024);
  CHECK(r.error_estimate >= 0.0);

  // Brute-force oracle: sup over all pairs with 0 < |x−y| < 1.
  auto brute = [](const std::vector<double>& x, const std::vector<double>& v, double mu) {
    double q = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        const double d = std::abs(x[i] - x[j]);
        if (d > 0 && d < 1) q = std::max(q, std::abs(v[i] - v[j]) / std::pow(d, mu));
      }
    return q;
  };
  const std::size_t N = 2001;
  auto sq = GridFunction::sample({Axis::interval(-1, 1, N)}, [](auto x) { return std::sqrt(std::abs(x[0])); });
  auto odd = GridFunction::sample({Axis::interval(-1, 1, N)},
                                  [](auto x) { return std::copysign(std::sqrt(std::abs(x[0])), x[0]); });
  std::vector<double> xs(N);
  for (std::size_t i = 0; i < N; ++i) xs[i] = sq.coords(i)[0];
  const double q_sq = brute(xs, sq.values(), 0.5);
  const double q_odd = brute(xs, odd.values(), 0.5);
  CHECK(q_sq == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(q_odd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(holder_norm_estimate(sq, 0.5).value == doctest::Approx(1.0 + q_sq).epsilon(1e-12));
  CHECK(holder_norm_estimate(odd, 0.5).value == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("holder norm monotonicity") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 5; ++t) {
    const double a1 = u(rng), a2 = u(rng), a3 = u(rng), ph = u(rng);
    auto f = GridFunction::sample({Axis::angle(256)}, [&](auto x) {
      return a1 * std::cos(x[0] + ph) + a2 * std::sin(2 * x[0]) + a3 * std::cos(5 * x[0]);
    });
    const double ells[] = {0.25, 0.5, 0.75, 1.0, 1.3, 1.7, 2.0, 2.5};
    std::vector<double> vals;
    for (double l : ells) vals.push_back(holder_norm_estimate(f, l).value);
    for (std::size_t i = 0; i < vals.size(); ++i)
      for (std::size_t j = i + 1; j < vals.size(); ++j) {
        if (std::floor(ells[i]) == std::floor(ells[j]) || ells[i] == std::floor(ells[j]))
          CHECK(vals[i] <= vals[j] * (1 + 1e-12));
        // Across integer parts the mean value theorem gives a factor two.
        CHECK(vals[i] <= 2.0 * vals[j] * (1 + 1e-12));
      }
  }
  // The literal C^{1/2} norm of cos exceeds its C¹ norm.
  auto cs = GridFunction::sample({Axis::angle(512)}, [](auto x) { return std::cos(x[0]); });
  CHECK(holder_norm_estimate(cs, 0.5).value > holder_norm_estimate(cs, 1.0).value);
}

TEST_CASE("holder quotient on a 2d grid uses the pair budget") {
  auto f = GridFunction::sample({Axis::interval(0, 1, 65), Axis::angle(256)},
                                [](auto x) { return x[0] * std::sin(x[1]); });
  const double full = holder_quotient(f, 0.5, 100'000'000);
  const double sampled = holder_quotient(f, 0.5, 1'000'000);
  CHECK(sampled <= full + 1e-15);
  CHECK(sampled >= 0.9 * full);
}

TEST_CASE("fourier decay check") {
  auto cs = GridFunction::sample({Axis::angle(256)}, [](auto x) { return std::cos(x[0]); });
  auto r = fourier_decay_check(cs, 1, 1.0, 8);
  // |f̂_{±1}| = 1/2 under the e^{ik·θ} normalization used throughout.
  CHECK(r.max_ratio_linf == doctest::Approx(0.5).epsilon(1e-12));
  for (const auto& e : r.entries)
    if (e.k.linf() >= 2) CHECK(e.magnitude < 1e-14);

  auto cubic = GridFunction::sample({Axis::angle(1024)}, [](auto x) {
    double s = 0;
    for (int k = 1; k <= 32; ++k) s += std::pow(k, -3.0) * std::cos(k * x[0]);
    return s;
  });
  auto rc = fourier_decay_check(cubic, 1, 1.0, 32);
  CHECK(std::isfinite(rc.max_ratio_linf));
  CHECK(rc.max_ratio_linf < 1.0);
  CHECK(rc.max_ratio_l1 == doctest::Approx(rc.max_ratio_linf));

  auto tri = GridFunction::sample({Axis::angle(1024)}, [](auto x) { return std::abs(x[0] - kPi); });
  auto rt = fourier_decay_check(tri, 1, 1.0, 64);
  CHECK(rt.max_ratio_linf < 1.0);
  // Odd harmonics of the triangle wave: 2/(πk²).
  for (const auto& e : rt.entries)
    if (e.k.linf() == 1 || e.k.linf() == 3)
      CHECK(e.magnitude == doctest::Approx(2.0 / (kPi * e.k.linf() * e.k.linf())).epsilon(1e-4));

  auto rough = GridFunction::sample({Axis::angle(1024)}, [](auto x) { return std::sqrt(std::abs(std::sin(x[0]))); });
  CHECK_THROWS_AS(fourier_decay_check(rough, 1, 1.0, 16), DomainError);
  CHECK_THROWS_AS(fourier_decay_check(cs, 1, 0.5, 8), DomainError);
}

TEST_CASE("serialization round trips") {
  std::mt19937_64 rng(23);
  const auto g = random_trig(rng, 3, 3, 2, 5);
  const auto j = to_json(g);
  CHECK(j.at("schema") == kTrigPolySchema);
  CHECK(trig_poly_from_json(json::parse(j.dump())) == g);

  auto f = GridFunction::sample({Axis::interval(-1, 1, 5), Axis::angle(4)},
                                [](auto x) { return x[0] + std::sin(x[1]) / 3.0; });
  for (auto fmt : {GridFormat::csv, GridFormat::binary}) {
    std::stringstream ss;
    write_grid(ss, f, fmt);
    const auto back = read_grid(ss);
    CHECK(back.axes() == f.axes());
    CHECK(back.values() == f.values());
  }
}
