// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include "neklab/cli/cli.hpp"
#include "neklab/core/fourier.hpp"
#include "neklab/dynamics/dynamics.hpp"
#include "neklab/geography/geography.hpp"
#include "neklab/normalform/normalform.hpp"
#include "neklab/smoothing/smoothing.hpp"
#include "neklab/steepness/steepness.hpp"

using namespace neklab;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<double> dyadic_widths() {
  std::vector<double> w;
  for (int e = 2; e <= 8; ++e) w.push_back(std::ldexp(1.0, -e));
  return w;
}

// Both smoothing sweeps are shared by criteria 1 and 2.
struct SmoothingRuns {
  smoothing::SweepResult one, two;
  double seconds = 0.0;
};

const SmoothingRuns& smoothing_runs() {
  static const SmoothingRuns runs = [] {
    SmoothingRuns r;
    const auto t0 = Clock::now();
    r.one = smoothing::smoothing_sweep(smoothing::holder_test_family(1, 2.5, 2000, 1.0, 33, {4096}),
                                       dyadic_widths(), 2.5);
    r.two = smoothing::smoothing_sweep(smoothing::holder_test_family(2, 2.5, 1000, 1.0, 17, {2048, 4}),
                                       dyadic_widths(), 2.5);
    r.seconds = seconds_since(t0);
    return r;
  }();
  return runs;
}

Outcome smoothing_rate() {
  const auto& r = smoothing_runs();
  const bool ok = r.one.slope_p0 >= 2.3 && r.one.slope_p1 >= 1.3 && r.two.slope_p0 >= 2.3 &&
                  r.two.slope_p1 >= 1.3 && r.seconds <= 120.0;
  return {ok, "n=1 slopes p0 " + fmt(r.one.slope_p0) + " p1 " + fmt(r.one.slope_p1) + "; n=2 slopes p0 " +
                  fmt(r.two.slope_p0) + " p1 " + fmt(r.two.slope_p1) + " (need >= 2.3, >= 1.3); " +
                  fmt(r.seconds) + " s"};
}

Outcome fourier_uniformity() {
  const auto& r = smoothing_runs();
  const bool ok = r.one.fourier_norm_spread <= 2.0 && r.two.fourier_norm_spread <= 2.0;
  return {ok, "max/min of the weighted norm over s: n=1 " + fmt(r.one.fourier_norm_spread) + ", n=2 " +
                  fmt(r.two.fourier_norm_spread) + " (need <= 2)"};
}

core::CoefficientGrid random_angle_table(std::mt19937_64& rng, std::size_t n, int order) {
  std::normal_distribution<double> g;
  core::CoefficientGrid c;
  c.angle_dim = n;
  std::vector<int> k(n, -order);
  while (true) {
    core::MultiIndex mk(k);
    if (!c.values.count(mk)) {
      const core::cplx z(g(rng), mk.is_zero() ? 0.0 : g(rng));
      c.values[mk] = {z};
      if (!mk.is_zero()) c.values[-mk] = {std::conj(z)};
    }
    std::size_t j = n;
    bool done = false;
    while (j-- > 0) {
      if (++k[j] <= order) break;
      k[j] = -order;
      if (j == 0) done = true;
    }
    if (done) break;
  }
  return c;
}

// Runs the 100 random inputs; returns the number with clean support and a
// serialization of every output.
std::pair<int, std::string> jackson_run() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> us(0.05, 1.0);
  int clean = 0;
  std::string digest;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const int order = n == 1 ? 30 : (n == 2 ? 10 : 5);
    const auto table = random_angle_table(rng, n, order);
    const double s = us(rng);
    // Every other input uses a wide Ψ whose support reaches past |k|₁ = 1/s.
    const auto psi = trial % 2 ? smoothing::BumpSpec::angle(n) : smoothing::BumpSpec{n, 1.0, 3.0, "exp-step"};
    const auto t = smoothing::jackson_smooth(table, s, psi);
    bool ok = true;
    for (const auto& [k, p] : t.terms()) ok = ok && static_cast<double>(k.l1()) * s <= 1.0;
    clean += ok;
    digest += core::to_json(t).dump();
  }
  return {clean, digest};
}

Outcome jackson_truncation() {
  const auto t0 = Clock::now();
  const int clean = jackson_run().first;
  const double secs = seconds_since(t0);
  return {clean == 100 && secs <= 10.0,
          std::to_string(clean) + "/100 outputs with empty support beyond |k|_1 = 1/s; " + fmt(secs) + " s"};
}

Outcome kernel_decay() {
  const auto phi = smoothing::BumpSpec::action(1);
  std::vector<double> radii;
  for (int i = 0; i <= 400; ++i) radii.push_back(0.1 * i);
  const auto coarse = smoothing::tabulate_kernel(phi, radii, 512);
  const auto fine = smoothing::tabulate_kernel(phi, radii, 1024);
  double peak = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double w = std::pow(1.0 + radii[i], 2.0);
    peak = std::max(peak, std::abs(fine.values[i]) * w);
    gap = std::max(gap, std::abs(fine.values[i] - coarse.values[i]) * w);
  }
  const bool ok = std::isfinite(peak) && gap <= 0.01 * peak;
  return {ok, "max |K(x)|(1+|x|)^2 over |x| <= 40 = " + fmt(peak) + ", change under doubled quadrature " +
                  fmt(100.0 * gap / peak) + "% of it"};
}

Outcome fourier_decay() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double ell = 2.5;
  double worst = 0.0;
  bool finite = true;
  for (int trial = 0; trial < 20; ++trial) {
    if (trial % 2 == 0) {
      const int band = 32;
      std::vector<double> a(band + 1), ph(band + 1);
      for (int k = 1; k <= band; ++k) {
        a[k] = g(rng) * std::pow(k, -(ell + 1.0));
        ph[k] = phase(rng);
      }
      const auto f = core::GridFunction::sample({core::Axis::angle(1024)}, [&](std::span<const double> x) {
        double s = 0.0;
        for (int k = 1; k <= band; ++k) s += a[k] * std::cos(k * x[0] + ph[k]);
        return s;
      });
      const auto r = core::fourier_decay_check(f, 1, ell, band);
      finite = finite && std::isfinite(r.max_ratio_linf);
      worst = std::max(worst, r.max_ratio_linf);
    } else {
      const int band = 8;
      std::vector<std::array<double, 4>> terms;
      for (int k1 = -band; k1 <= band; ++k1)
        for (int k2 = 0; k2 <= band; ++k2) {
          if (k2 == 0 && k1 <= 0) continue;
          const double norm = std::max(std::abs(k1), k2);
          terms.push_back({double(k1), double(k2), g(rng) * std::pow(norm, -(ell + 2.0)), phase(rng)});
        }
      const auto f = core::GridFunction::sample({core::Axis::angle(128), core::Axis::angle(128)},
                                                [&](std::span<const double> x) {
                                                  double s = 0.0;
                                                  for (const auto& t : terms)
                                                    s += t[2] * std::cos(t[0] * x[0] + t[1] * x[1] + t[3]);
                                                  return s;
                                                });
      const auto r = core::fourier_decay_check(f, 2, ell, band);
      finite = finite && std::isfinite(r.max_ratio_linf);
      worst = std::max(worst, r.max_ratio_linf);
    }
  }
  return {finite && worst < 10.0,
          "max_k |f_k| |k|_inf^2 / |f|_C2 over 20 band-limited functions = " + fmt(worst) + " (need < 10)"};
}

Outcome steepness_classification() {
  const auto t0 = Clock::now();
  steepness::EstimateOptions opt;
  opt.seed = 42;
  const auto convex = steepness::estimate_indices(steepness::benchmark("convex3"), opt);
  bool ok = convex.profile.has_value();
  std::string detail = "convex3 indices";
  if (convex.profile)
    for (double a : convex.profile->alpha) {
      ok = ok && a >= 0.9 && a <= 1.1;
      detail += " " + fmt(a);
    }

  const auto sc = steepness::estimate_indices(steepness::benchmark("superconductivity"), opt);
  ok = ok && sc.violation && sc.violation->margin < 1e-12;
  detail += "; superconductivity " +
            (sc.violation ? "violation, witness margin " + fmt(sc.violation->margin) : std::string("no violation"));

  steepness::EstimateOptions at;
  at.seed = 42;
  at.points = {steepness::Vec::Unit(3, 0)};
  const auto q = steepness::estimate_indices(steepness::benchmark("quartic-steep"), at);
  double worst = 0.0;
  if (q.profile)
    for (double a : q.profile->alpha) worst = std::max(worst, a);
  ok = ok && q.profile && worst >= 2.7 && worst <= 3.3;
  const double secs = seconds_since(t0);
  ok = ok && secs <= 300.0;
  detail += "; quartic-steep worst index at (1,0,0) " + fmt(worst) + "; " + fmt(secs) + " s";
  return {ok, detail};
}

Outcome geography_checks() {
  const auto t0 = Clock::now();
  const auto g3 = geography::geography_params(3, {1.0, 1.0}, 4.0);
  const auto g4 = geography::geography_params(4, {1.0, 2.0, 3.0}, 5.0);
  bool params_ok = g3.p == std::vector<double>{1, 1, 1} && g3.q == std::vector<double>{2, 1, 0} &&
                   g3.c == std::vector<double>{1, 1} && g3.a == 1.0 / 6.0 && g3.b == 1.0 / 6.0 &&
                   g4.p == std::vector<double>{2, 2, 1, 1} && g4.q == std::vector<double>{7, 6, 1, 0} &&
                   g4.c == std::vector<double>{1, 5, 1} && g4.a == 1.0 / 16.0 && g4.b == 1.0 / 48.0;

  const steepness::Vec center = steepness::Vec::Unit(3, 2);
  const auto omega =
      steepness::FrequencyMap::from_polynomial(steepness::benchmark_hamiltonian("convex3"), center, 0.5);
  double min_coverage = 1.0;
  std::size_t violations = 0, small = 0, pairs = 0;
  double maxK = 0.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto sched = geography::make_schedule(eps, 1.0, g3, 1.0, geography::convex3_prefactors());
    maxK = std::max(maxK, sched.K);
    const geography::Geography geo(sched, omega, center);
    const auto cov = geo.covering_check(10'000, 1);
    min_coverage = std::min(min_coverage, cov.coverage);
    const auto dis = geo.disjointness_all(10'000, 1);
    violations += dis.violation_count;
    small += dis.small_divisor_count;
    pairs += dis.lattices_sampled;
  }
  const double secs = seconds_since(t0);
  const bool ok = params_ok && min_coverage == 1.0 && violations == 0 && maxK <= 5.0 && secs <= 600.0;
  return {ok, std::string("parameter tuples ") + (params_ok ? "exact" : "MISMATCH") + "; coverage " +
                  fmt(min_coverage) + " over 3x10^4 samples; " + std::to_string(violations) +
                  " disjointness violations (" + std::to_string(small) + " small-divisor) over 3x10^4 samples, " +
                  std::to_string(pairs) + " lattices sampled, K <= " + fmt(maxK) + "; " + fmt(secs) + " s"};
}

Outcome normal_form() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const char* name : {"pendulum1", "resonant2"}) {
    const auto a = normalform::benchmark(name, 0.5);
    const auto b = normalform::benchmark(name, 0.25);
    const auto ra = normalform::normalize(a.h, a.f, a.lattice, a.thresholds, a.domain);
    const auto rb = normalform::normalize(b.h, b.f, b.lattice, b.thresholds, b.domain);
    const auto va = normalform::verify_normalform(ra, a.h, a.f, a.lattice, a.thresholds, a.domain);
    const auto vb = normalform::verify_normalform(rb, b.h, b.f, b.lattice, b.thresholds, b.domain);
    const double factor = std::max(ra.diagnostics.remainder_factor, rb.diagnostics.remainder_factor);
    const double ratio = ra.diagnostics.g_distance / rb.diagnostics.g_distance;
    const double sympl = std::max(va.symplectic_defect, vb.symplectic_defect);
    const bool disp = va.action_ratio <= va.action_bound && va.angle_ratio <= va.angle_bound &&
                      vb.action_ratio <= vb.action_bound && vb.angle_ratio <= vb.angle_bound;
    const bool support = va.support_exact && vb.support_exact;
    ok = ok && factor <= 10.0 && ratio >= 3.5 && disp && sympl <= 1e-6 && support;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": remainder factor " + fmt(factor) +
              ", |g-g0| halving ratio " + fmt(ratio) + ", displacement " + fmt(va.action_ratio / va.action_bound) +
              "/" + fmt(va.angle_ratio / va.angle_bound) + " of bounds, symplectic " + fmt(sympl) + ", support " +
              (support ? "exact" : "WRONG");
  }
  const double secs = seconds_since(t0);
  return {ok && secs <= 120.0, detail + "; " + fmt(secs) + " s"};
}

Outcome stability_scaling() {
  const auto t0 = Clock::now();
  const auto rep = dynamics::stability_sweep(dynamics::StabilityConfig{});
  const double slope_floor = 1.0 / 6.0 - 0.05;
  bool ok = rep.fit.slope >= slope_floor && rep.C_ratio <= 1.1;
  std::size_t truncated = 0;
  for (const auto& r : rep.records) truncated += r.truncated;

  double channel_err = 0.0;
  for (double eps : {1e-2, 1e-3}) {
    dynamics::IntegratorSpec spec;
    spec.dt = 1.0;
    spec.t_end = 1e3 / eps;
    spec.stride = 1;
    const auto tr = dynamics::integrate(dynamics::benchmark_system("channel", eps), {{0.0, 0.0}, {0.0, 0.0}}, spec);
    for (std::size_t i = 1; i < tr.size(); ++i) {
      const double want = eps * tr.t[i];
      channel_err = std::max({channel_err, std::abs(tr.I[i][0] + want) / want, std::abs(tr.I[i][1] - want) / want});
    }
  }
  ok = ok && channel_err <= 0.01;
  const double secs = seconds_since(t0);
  ok = ok && secs <= 1800.0;
  return {ok, "drift slope " + fmt(rep.fit.slope) + " (95% band " + fmt(rep.fit.slope_low) + ".." +
                  fmt(rep.fit.slope_high) + ", need >= " + fmt(slope_floor) + "); max drift/(C eps^(1/6)) " +
                  fmt(rep.C_ratio) + " with C = " + fmt(rep.C) + " (need <= 1.1); " + std::to_string(truncated) +
                  " horizons capped at t_max; channel relative error " + fmt(channel_err) + "; " + fmt(secs) + " s"};
}

Outcome determinism() {
  const auto t0 = Clock::now();
  struct Pipeline {
    std::string sub;
    std::string yaml;
  };
  const std::vector<Pipeline> pipelines{
      {"smooth", "schema_version: 1\n"},
      {"smooth", "schema_version: 1\nsmooth: {n: 2}\n"},
      {"steepness", "schema_version: 1\nseed: 42\n"},
      {"steepness", "schema_version: 1\nseed: 42\nhamiltonian: {benchmark: superconductivity}\n"},
      {"steepness", "schema_version: 1\nseed: 42\nhamiltonian: {benchmark: quartic-steep}\n"
                    "steepness: {points: [[1, 0, 0]]}\n"},
      {"geography", "schema_version: 1\nseed: 1\n"},
      {"normalform", "schema_version: 1\n"},
      {"normalform", "schema_version: 1\nnormalform: {benchmark: resonant2}\n"},
      {"stability", "schema_version: 1\n"},
  };
  std::size_t identical = 0, files = 0;
  std::string failed;
  for (const auto& p : pipelines) {
    const auto cfg = cli::parse_config(p.yaml, p.sub);
    const auto a = cli::execute(cfg);
    const auto b = cli::execute(cfg);
    const bool same = a.exit_code == 0 && a.files == b.files;
    identical += same;
    files += a.files.size();
    if (!same) failed += " " + p.sub;
  }
  // The random Jackson inputs as well.
  const bool lib_same = jackson_run().second == jackson_run().second;
  const double secs = seconds_since(t0);
  return {identical == pipelines.size() && lib_same,
          std::to_string(identical) + "/" + std::to_string(pipelines.size()) + " pipelines byte-identical on rerun (" +
              std::to_string(files) + " artifacts)" + (failed.empty() ? "" : ", differing:" + failed) + "; " +
              fmt(secs) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"smoothing rate", smoothing_rate},
      {"Fourier-norm uniformity", fourier_uniformity},
      {"Jackson truncation exactness", jackson_truncation},
      {"kernel decay", kernel_decay},
      {"Fourier decay", fourier_decay},
      {"steepness classification", steepness_classification},
      {"geography identities and lemmas", geography_checks},
      {"normal form", normal_form},
      {"stability scaling", stability_scaling},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
