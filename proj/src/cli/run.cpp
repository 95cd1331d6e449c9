#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "neklab/cli/cli.hpp"
#include "neklab/dynamics/dynamics.hpp"
#include "neklab/geography/geography.hpp"
#include "neklab/normalform/normalform.hpp"
#include "neklab/smoothing/smoothing.hpp"
#include "neklab/steepness/steepness.hpp"

namespace neklab::cli {

namespace fs = std::filesystem;
using core::cplx;
using core::format_double;
using core::json;
using core::MultiIndex;
using core::Polynomial;
using core::TrigPoly;

namespace {

using Clock = std::chrono::steady_clock;

// Progress goes to the "neklab" logger when the host program registered one.
template <class... Args>
void info(const char* fmt, const Args&... args) {
  if (const auto log = spdlog::get("neklab")) log->info(fmt::runtime(fmt), args...);
}

class Deadline {
 public:
  explicit Deadline(double secs) : secs_(secs), start_(Clock::now()) {}
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  double remaining() const { return secs_ > 0.0 ? std::max(secs_ - elapsed(), 1e-3) : 0.0; }
  void check(const std::string& where, long long done) const {
    if (secs_ > 0.0 && elapsed() > secs_) throw BudgetError(where + ": wall-clock budget exceeded", done);
  }

 private:
  double secs_;
  Clock::time_point start_;
};

// Runs fn(i) for i < count on `threads` workers; results stay in index order
// and the first failure (by index) is rethrown.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, std::size_t threads, F&& fn) {
  std::vector<std::optional<T>> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  auto work = [&] {
    for (std::size_t i = next++; i < count && !abort; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        abort = true;
      }
    }
  };
  const std::size_t nt = std::max<std::size_t>(1, std::min(threads, count));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> res;
  for (auto& o : out) res.push_back(std::move(*o));
  return res;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Hamiltonian {
  std::string id;
  Polynomial h;
  /// Perturbation shape, scaled by ε in dynamical runs.
  TrigPoly f;
  std::size_t n = 0;
};

Hamiltonian load_hamiltonian(const ExperimentConfig& cfg) {
  Hamiltonian H;
  if (!cfg.hamiltonian_file.empty()) {
    std::ifstream in(cfg.hamiltonian_file);
    json j;
    try {
      in >> j;
      const TrigPoly g = core::trig_poly_from_json(j);
      H.n = g.dim();
      const Polynomial* h0 = g.coefficient(MultiIndex(std::vector<int>(H.n, 0)));
      if (!h0) throw ConfigError("hamiltonian.file", "no angle-independent part h(I)");
      H.h = *h0;
      H.f = g.filtered([](const MultiIndex& k) { return !k.is_zero(); });
    } catch (const json::exception& e) {
      throw ConfigError("hamiltonian.file", std::string("unreadable TrigPoly JSON: ") + e.what());
    } catch (const DomainError& e) {
      throw ConfigError("hamiltonian.file", e.what());
    }
    H.id = "file";
  } else {
    const auto names = steepness::benchmark_names();
    if (std::find(names.begin(), names.end(), cfg.hamiltonian) == names.end())
      throw ConfigError("hamiltonian.benchmark", "unknown benchmark '" + cfg.hamiltonian + "'");
    H.id = cfg.hamiltonian;
    H.h = steepness::benchmark_hamiltonian(cfg.hamiltonian);
    H.n = H.h.nvars();
    if (H.n == 3) {
      H.f = dynamics::benchmark_system("convex3", 1.0).f;
    } else {
      H.f = dynamics::benchmark_system("channel", 1.0).f;
    }
  }
  if (cfg.n && *cfg.n != H.n)
    throw ConfigError("n", "n = " + std::to_string(*cfg.n) + " but the Hamiltonian has " + std::to_string(H.n) +
                               " actions");
  return H;
}

std::vector<double> default_alpha(const ExperimentConfig& cfg, std::size_t n) {
  if (!cfg.alpha.empty()) {
    if (cfg.alpha.size() != n - 1) throw ConfigError("alpha", "needs n - 1 = " + std::to_string(n - 1) + " entries");
    return cfg.alpha;
  }
  return std::vector<double>(n - 1, 1.0);
}

geography::Prefactors resolve_prefactors(const ExperimentConfig& cfg, geography::Prefactors base) {
  json j = base.to_json();
  for (auto it = cfg.prefactors.begin(); it != cfg.prefactors.end(); ++it) j[it.key()] = it.value();
  return geography::Prefactors::from_json(j);
}

steepness::Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const steepness::Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void require_dim(const std::vector<double>& v, std::size_t n, const std::string& field) {
  if (v.size() != n) throw ConfigError(field, "needs " + std::to_string(n) + " entries");
}

// smooth --------------------------------------------------------------------

void run_smooth(const ExperimentConfig& cfg, const Deadline& dl, RunResult& res) {
  const auto& s = cfg.smooth;
  const double ell = cfg.ell.value_or(2.5);
  const int k_max = s.k_max > 0 ? s.k_max : (s.n == 1 ? 2000 : 1000);
  const std::size_t action_nodes = s.action_nodes ? s.action_nodes : (s.n == 1 ? 33 : 17);
  std::vector<std::size_t> angle_nodes = s.angle_nodes;
  if (angle_nodes.empty()) angle_nodes = s.n == 1 ? std::vector<std::size_t>{4096} : std::vector<std::size_t>{2048, 4};
  if (angle_nodes.size() != s.n) throw ConfigError("smooth.angle_nodes", "needs n entries");
  std::vector<double> widths;
  if (cfg.sweep) {
    widths = *cfg.sweep;
  } else {
    for (int e = 2; e <= 8; ++e) widths.push_back(std::ldexp(1.0, -e));
  }
  for (double w : widths)
    if (w > 1.0) throw ConfigError("sweep", "smoothing widths must lie in (0, 1]");

  info("smooth: n = {}, ell = {}, {} widths", s.n, ell, widths.size());
  const auto f = smoothing::holder_test_family(s.n, ell, k_max, s.R, action_nodes, angle_nodes);
  const auto r = smoothing::smoothing_sweep(f, widths, ell);
  dl.check("smooth", static_cast<long long>(widths.size()));

  std::ostringstream csv;
  csv << "s,p,error\n";
  json reports = json::array();
  for (const auto& rep : r.reports) {
    for (std::size_t p = 0; p < rep.errors.size(); ++p)
      csv << format_double(rep.s) << ',' << p << ',' << format_double(rep.errors[p]) << '\n';
    reports.push_back(rep.to_json());
  }
  res.files["smoothing.csv"] = csv.str();
  res.files["smoothing.json"] = dump(json{{"n", s.n},
                                          {"ell", ell},
                                          {"slope_p0", r.slope_p0},
                                          {"slope_p1", r.slope_p1},
                                          {"holder_norm", r.holder_norm},
                                          {"C_A_hat", r.C_A_hat},
                                          {"C_B_hat", r.C_B_hat},
                                          {"fourier_norm_spread", r.fourier_norm_spread},
                                          {"reports", reports}});
}

// steepness -----------------------------------------------------------------

void run_steepness(const ExperimentConfig& cfg, const Deadline& dl, RunResult& res) {
  const Hamiltonian H = load_hamiltonian(cfg);
  const auto& s = cfg.steepness;
  std::optional<steepness::FrequencyMap> map;
  if (H.id == "file") {
    if (s.center.empty()) throw ConfigError("steepness.center", "required for a Hamiltonian file");
    require_dim(s.center, H.n, "steepness.center");
    map = steepness::FrequencyMap::from_polynomial(H.h, to_vec(s.center), s.radius);
  } else {
    map = steepness::benchmark(H.id);
  }
  steepness::EstimateOptions opt;
  opt.grid_nodes = s.grid_nodes;
  opt.random_points = s.random_points;
  opt.frames_per_multiplicity = s.frames;
  opt.xi_max = s.xi_max;
  opt.xi_points = s.xi_points;
  opt.xi_decades = s.xi_decades;
  opt.seed = cfg.seed;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    require_dim(s.points[i], H.n, "steepness.points");
    opt.points.push_back(to_vec(s.points[i]));
  }
  info("steepness: {} (n = {})", H.id, H.n);
  const auto r = steepness::estimate_indices(*map, opt);
  dl.check("steepness", 1);
  json out{{"hamiltonian", H.id},
           {"status", r.violation ? "violation" : "profile"},
           {"result", r.to_json()}};
  res.files["steepness.json"] = dump(out);
}

// geography -----------------------------------------------------------------

void run_geography(const ExperimentConfig& cfg, const Deadline& dl, RunResult& res) {
  const Hamiltonian H = load_hamiltonian(cfg);
  if (H.n < 3) throw ConfigError("n", "n >= 3 required for geography");
  const auto& s = cfg.geography;
  require_dim(s.center, H.n, "geography.center");
  const auto params = geography::geography_params(H.n, default_alpha(cfg, H.n), cfg.ell.value_or(4.0));
  const auto pre =
      resolve_prefactors(cfg, H.id == "convex3" ? geography::convex3_prefactors() : geography::Prefactors{});
  const std::vector<double> eps = cfg.sweep.value_or(std::vector<double>{1e-2, 1e-3, 1e-4});
  const auto omega = steepness::FrequencyMap::from_polynomial(H.h, to_vec(s.center), s.radius);

  struct Point {
    json report;
    std::string row;
    std::optional<json> witness;
  };
  const auto points = parallel_map<Point>(eps.size(), cfg.threads, [&](std::size_t i) {
    dl.check("geography", static_cast<long long>(i));
    info("geography: eps = {}", eps[i]);
    const auto sched = geography::make_schedule(eps[i], s.eps0, params, s.M, pre);
    const geography::Geography geo(sched, omega, to_vec(s.center));
    const auto cov = geo.covering_check(s.coverage_samples, cfg.seed);
    const auto dis = geo.disjointness_all(s.disjointness_samples, cfg.seed);
    Point p;
    p.report = geography::geography_report(geo, cov, dis);
    p.report["eps"] = eps[i];
    p.report["lattice_count"] = geo.lattices().size();
    p.row = format_double(eps[i]) + ',' + format_double(sched.K) + ',' + std::to_string(geo.lattices().size()) +
            ',' + format_double(cov.coverage) + ',' + std::to_string(dis.violation_count) + ',' +
            std::to_string(dis.small_divisor_count) + '\n';
    if (!cov.mismatches.empty()) {
      json pts = json::array();
      for (const auto& v : cov.mismatches) pts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
      p.witness = json{{"invariant", "indexed and direct classification agree"}, {"eps", eps[i]}, {"points", pts}};
    }
    return p;
  });
  std::ostringstream csv;
  csv << "epsilon,K,lattices,coverage,violations,small_divisor_violations\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].witness) throw ConsistencyError("geography: " + points[i].witness->dump());
    csv << points[i].row;
    res.files["geography_" + std::to_string(i) + ".json"] = dump(points[i].report);
  }
  res.files["geography.csv"] = csv.str();
}

// normalform ----------------------------------------------------------------

void run_normalform(const ExperimentConfig& cfg, const Deadline& dl, RunResult& res) {
  const auto& s = cfg.normalform;
  if (s.benchmark != "pendulum1" && s.benchmark != "resonant2")
    throw ConfigError("normalform.benchmark", "expected pendulum1 or resonant2");
  const double eps_max = normalform::benchmark(s.benchmark, 1.0).thresholds.eps;
  const std::vector<double> eps = cfg.sweep.value_or(std::vector<double>{0.5 * eps_max, 0.25 * eps_max});
  for (double e : eps)
    if (e > eps_max * (1.0 + 1e-12))
      throw ConfigError("sweep", "epsilon " + format_double(e) + " exceeds the threshold " + format_double(eps_max));
  normalform::NormalizeOptions opt;
  opt.steps = s.steps;
  opt.lie_order = s.lie_order;
  opt.homological.fit_degree = s.fit_degree;

  struct Point {
    json report;
    std::string row;
  };
  const auto points = parallel_map<Point>(eps.size(), cfg.threads, [&](std::size_t i) {
    dl.check("normalform", static_cast<long long>(i));
    info("normalform: {} eps = {}", s.benchmark, eps[i]);
    const auto b = normalform::benchmark(s.benchmark, std::min(1.0, eps[i] / eps_max));
    const auto r = normalform::normalize(b.h, b.f, b.lattice, b.thresholds, b.domain, opt);
    const auto v = normalform::verify_normalform(r, b.h, b.f, b.lattice, b.thresholds, b.domain, s.probes, cfg.seed);
    const auto& d = r.diagnostics;
    Point p;
    p.report = json{{"benchmark", s.benchmark},
                    {"eps", b.thresholds.eps},
                    {"thresholds", b.thresholds.to_json()},
                    {"result", r.to_json()},
                    {"verification", v.to_json()}};
    p.row = format_double(b.thresholds.eps) + ',' + format_double(d.remainder_norm) + ',' +
            format_double(d.remainder_bound) + ',' + format_double(d.g_distance) + ',' + format_double(d.g_bound) +
            ',' + format_double(v.symplectic_defect) + ',' + format_double(v.energy_defect) + ',' +
            (v.support_exact ? "1" : "0") + '\n';
    return p;
  });
  std::ostringstream csv;
  csv << "epsilon,remainder_norm,remainder_bound,g_distance,g_bound,symplectic_defect,energy_defect,support_exact\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv << points[i].row;
    res.files["normalform_" + std::to_string(i) + ".json"] = dump(points[i].report);
  }
  res.files["normalform.csv"] = csv.str();
}

// stability -----------------------------------------------------------------

void run_stability(const ExperimentConfig& cfg, const Deadline& dl, RunResult& res) {
  const Hamiltonian H = load_hamiltonian(cfg);
  if (H.n < 3) throw ConfigError("n", "n >= 3 required for stability");
  const auto& s = cfg.stability;
  require_dim(s.center, H.n, "stability.center");
  dynamics::StabilityConfig sc;
  sc.system = H.id;
  if (H.id != "convex3") sc.shape = dynamics::System{H.h, H.f};
  if (cfg.sweep) sc.eps = *cfg.sweep;
  sc.eps0 = s.eps0;
  sc.alpha = default_alpha(cfg, H.n);
  sc.ell = cfg.ell.value_or(4.0);
  sc.M = s.M;
  sc.prefactors =
      resolve_prefactors(cfg, H.id == "convex3" ? dynamics::convex3_stability_prefactors() : geography::Prefactors{});
  sc.center = s.center;
  sc.ic_radius = s.ic_radius;
  sc.initial_conditions = s.initial_conditions;
  sc.dt = s.dt;
  sc.max_steps = s.max_steps;
  sc.stride = s.stride;
  sc.seed = cfg.seed;
  sc.threads = cfg.threads;
  sc.itineraries = s.itineraries;
  sc.budget_secs = dl.remaining();
  info("stability: {} over {} values of eps", H.id, sc.eps.size());
  const auto r = dynamics::stability_sweep(sc);
  std::ostringstream csv;
  r.write_csv(csv);
  res.files["drift.csv"] = csv.str();
  json j = r.to_json();
  j["hamiltonian"] = H.id;
  res.files["drift.json"] = dump(j);
}

// fit -----------------------------------------------------------------------

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void run_fit(const ExperimentConfig& cfg, const Deadline&, RunResult& res) {
  std::vector<double> eps, values;
  for (const auto& path : cfg.fit.inputs) {
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("fit.inputs", "empty file " + path);
    const auto header = split_csv(line);
    const auto col = [&](const std::string& name) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw ConfigError("fit.column", "no column '" + name + "' in " + path);
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ce = col("epsilon"), cv = col(cfg.fit.column);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split_csv(line);
      if (cells.size() <= std::max(ce, cv) || cells[cv].empty()) continue;
      try {
        eps.push_back(std::stod(cells[ce]));
        values.push_back(std::stod(cells[cv]));
      } catch (const std::exception&) {
        throw ConfigError("fit.inputs", "non-numeric cell in " + path);
      }
    }
  }
  const auto f = dynamics::fit_exponents(eps, values, cfg.fit.ell);
  json j = f.to_json();
  j["column"] = cfg.fit.column;
  j["points"] = eps.size();
  res.files["fit.json"] = dump(j);
}

}  // namespace

RunResult execute(const ExperimentConfig& cfg) {
  RunResult res;
  const Deadline dl(cfg.budget_secs);
  try {
    validate(cfg);
    if (cfg.subcommand == "smooth") run_smooth(cfg, dl, res);
    else if (cfg.subcommand == "steepness") run_steepness(cfg, dl, res);
    else if (cfg.subcommand == "geography") run_geography(cfg, dl, res);
    else if (cfg.subcommand == "normalform") run_normalform(cfg, dl, res);
    else if (cfg.subcommand == "stability") run_stability(cfg, dl, res);
    else run_fit(cfg, dl, res);
    res.exit_code = 0;
    res.message = "ok";
  } catch (const ConfigError& e) {
    res = RunResult{1, e.what(), {}};
  } catch (const DomainError& e) {
    res = RunResult{1, e.what(), {}};
  } catch (const BudgetError& e) {
    res = RunResult{2, e.what(), {}};
  } catch (const ResolutionError& e) {
    res = RunResult{2, e.what(), {}};
  } catch (const std::exception& e) {
    res = RunResult{3, e.what(), {}};
    res.files["witness.json"] = dump(json{{"subcommand", cfg.subcommand}, {"error", e.what()}, {"config", cfg.to_json()}});
  }
  return res;
}

}  // namespace neklab::cli
