#include "neklab/dynamics/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "neklab/core/fit.hpp"
#include "neklab/errors.hpp"

namespace neklab::dynamics {

using core::cplx;
using core::json;
using core::MultiIndex;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

geography::Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const geography::Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Two-sided 95% Student t quantiles for 1 … 30 degrees of freedom.
double t_quantile_95(std::size_t dof) {
  static constexpr double table[] = {12.706, 4.303, 2.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) return std::numeric_limits<double>::infinity();
  if (dof <= 30) return table[dof - 1];
  return 1.96;
}

}  // namespace

double System::energy(const std::vector<double>& I, const std::vector<double>& theta) const {
  return h.evaluate(std::span<const double>(I)).real() + (f.is_zero() ? 0.0 : f.evaluate(I, theta));
}

System benchmark_system(const std::string& name, double eps) {
  auto x = [](std::size_t n, std::size_t j) { return Polynomial::variable(n, j); };
  System s;
  if (name == "pendulum") {
    s.h = x(1, 0).pow(2) * cplx(0.5);
    s.f = TrigPoly::cosine(MultiIndex{1}, eps);
  } else if (name == "channel") {
    s.h = (x(2, 0).pow(2) - x(2, 1).pow(2)) * cplx(0.5);
    s.f = TrigPoly::sine(MultiIndex{1, -1}, eps);
  } else if (name == "convex3") {
    s.h = (x(3, 0).pow(2) + x(3, 1).pow(2) + x(3, 2).pow(2)) * cplx(0.5);
    s.f = TrigPoly::cosine(MultiIndex{1, 0, 0}, eps) + TrigPoly::cosine(MultiIndex{1, -1, 0}, eps) +
          TrigPoly::cosine(MultiIndex{0, 1, -1}, eps);
  } else {
    throw DomainError("unknown dynamics benchmark '" + name + "'");
  }
  return s;
}

std::vector<std::string> benchmark_system_names() { return {"channel", "convex3", "pendulum"}; }

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::automatic:
      return "automatic";
    case Scheme::splitting:
      return "splitting";
    case Scheme::implicit_midpoint:
      return "implicit_midpoint";
  }
  return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "automatic") return Scheme::automatic;
  if (name == "splitting") return Scheme::splitting;
  if (name == "implicit_midpoint") return Scheme::implicit_midpoint;
  throw DomainError("unknown integration scheme '" + name + "'");
}

void IntegratorSpec::validate() const {
  if (!(dt > 0.0)) throw DomainError("IntegratorSpec: step size must be positive");
  if (!(t_end >= 0.0)) throw DomainError("IntegratorSpec: total time must be non-negative");
  if (!(tolerance > 0.0)) throw DomainError("IntegratorSpec: tolerance must be positive");
  if (max_iterations == 0) throw DomainError("IntegratorSpec: max_iterations must be positive");
  if (stride == 0) throw DomainError("IntegratorSpec: stride must be positive");
  if (!(action_bound > 0.0)) throw DomainError("IntegratorSpec: action_bound must be positive");
}

json IntegratorSpec::to_json() const {
  json j{{"scheme", scheme_name(scheme)}, {"dt", dt},         {"t_end", t_end}, {"tolerance", tolerance},
         {"max_iterations", max_iterations}, {"stride", stride}, {"seed", seed}};
  j["action_bound"] = std::isfinite(action_bound) ? json(action_bound) : json(nullptr);
  return j;
}

Stepper::Stepper(const System& sys, const IntegratorSpec& spec)
    : n_(sys.dim()), scheme_(spec.scheme), tolerance_(spec.tolerance), max_iterations_(spec.max_iterations) {
  spec.validate();
  if (n_ == 0) throw DomainError("Stepper: empty system");
  if (!sys.f.is_zero() && sys.f.dim() != n_) throw DomainError("Stepper: f and h have different dimensions");
  const bool angle_only = sys.angle_only();
  if (scheme_ == Scheme::automatic) scheme_ = angle_only ? Scheme::splitting : Scheme::implicit_midpoint;
  if (scheme_ == Scheme::splitting && !angle_only)
    throw DomainError("Stepper: splitting needs a perturbation independent of the actions");
  for (std::size_t j = 0; j < n_; ++j) omega_.push_back(sys.h.derivative(j));
  if (sys.f.is_zero()) return;
  for (const auto& [k, p] : sys.f.terms()) {
    Term t;
    t.k.assign(k.entries().begin(), k.entries().end());
    t.c = p.constant_term();
    terms_.push_back(std::move(t));
  }
  for (std::size_t j = 0; j < n_; ++j) {
    f_theta_.push_back(sys.f.d_angle(j));
    f_action_.push_back(sys.f.d_action(j));
  }
}

void Stepper::omega(const std::vector<double>& I, std::vector<double>& w) const {
  const std::span<const double> x(I);
  for (std::size_t j = 0; j < n_; ++j) w[j] = omega_[j].evaluate(x).real();
}

void Stepper::kick(State& s, double dt) const {
  // I_j ← I_j − dt ∂f/∂θ_j, with ∂f/∂θ_j = Re Σ i k_j c_k e^{ik·θ}.
  for (const auto& t : terms_) {
    double phase = 0.0;
    for (std::size_t j = 0; j < n_; ++j) phase += t.k[j] * s.theta[j];
    const cplx d = cplx(0.0, 1.0) * t.c * std::polar(1.0, phase);
    for (std::size_t j = 0; j < n_; ++j)
      if (t.k[j] != 0.0) s.I[j] -= dt * t.k[j] * d.real();
  }
}

void Stepper::vector_field(const std::vector<double>& I, const std::vector<double>& th, std::vector<double>& dI,
                           std::vector<double>& dth) const {
  omega(I, dth);
  for (std::size_t j = 0; j < n_; ++j) dI[j] = 0.0;
  if (f_theta_.empty()) return;
  for (std::size_t j = 0; j < n_; ++j) {
    dI[j] = -f_theta_[j].evaluate(I, th);
    dth[j] += f_action_[j].evaluate(I, th);
  }
}

void Stepper::step(State& s, double dt) const {
  if (scheme_ == Scheme::splitting) {
    std::vector<double> w(n_);
    kick(s, 0.5 * dt);
    omega(s.I, w);
    for (std::size_t j = 0; j < n_; ++j) s.theta[j] += dt * w[j];
    kick(s, 0.5 * dt);
    return;
  }
  // Implicit midpoint by fixed-point iteration.
  std::vector<double> dI(n_), dth(n_), mI(n_), mth(n_), I1(n_), th1(n_);
  vector_field(s.I, s.theta, dI, dth);
  for (std::size_t j = 0; j < n_; ++j) {
    I1[j] = s.I[j] + dt * dI[j];
    th1[j] = s.theta[j] + dt * dth[j];
  }
  for (std::size_t it = 0; it < max_iterations_; ++it) {
    for (std::size_t j = 0; j < n_; ++j) {
      mI[j] = 0.5 * (s.I[j] + I1[j]);
      mth[j] = 0.5 * (s.theta[j] + th1[j]);
    }
    vector_field(mI, mth, dI, dth);
    double diff = 0.0, scale = 1.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = s.I[j] + dt * dI[j];
      const double b = s.theta[j] + dt * dth[j];
      if (!std::isfinite(a) || !std::isfinite(b)) throw IntegrationError("implicit midpoint: iterate is not finite");
      diff = std::max({diff, std::abs(a - I1[j]), std::abs(b - th1[j])});
      scale = std::max({scale, std::abs(a), std::abs(b)});
      I1[j] = a;
      th1[j] = b;
    }
    if (diff <= tolerance_ * scale) {
      s.I = I1;
      s.theta = th1;
      return;
    }
  }
  throw IntegrationError("implicit midpoint: fixed point did not converge");
}

void Trajectory::write_csv(std::ostream& os) const {
  const std::size_t n = I.empty() ? 0 : I.front().size();
  os << "t";
  for (std::size_t j = 1; j <= n; ++j) os << ",I" << j;
  for (std::size_t j = 1; j <= n; ++j) os << ",theta" << j;
  os << ",H\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << core::format_double(t[i]);
    for (double v : I[i]) os << ',' << core::format_double(v);
    for (double v : theta[i]) os << ',' << core::format_double(v);
    os << ',' << core::format_double(H[i]) << '\n';
  }
}

double Trajectory::energy_error() const {
  double e = 0.0;
  for (double v : H) e = std::max(e, std::abs(v - H.front()));
  return e;
}

Trajectory integrate(const System& sys, const State& s0, const IntegratorSpec& spec) {
  spec.validate();
  const std::size_t n = sys.dim();
  if (s0.I.size() != n || s0.theta.size() != n) throw DomainError("integrate: state dimension mismatch");
  for (double v : s0.I)
    if (std::abs(v) > spec.action_bound) throw DomainError("integrate: initial actions outside the domain");
  const Stepper stepper(sys, spec);

  Trajectory tr;
  tr.dt = spec.dt;
  tr.stride = spec.stride;
  tr.scheme = stepper.scheme();
  State s = s0;
  for (auto& v : s.theta) v = wrap_angle(v);
  auto record = [&](double t) {
    tr.t.push_back(t);
    tr.I.push_back(s.I);
    std::vector<double> th(n);
    for (std::size_t j = 0; j < n; ++j) th[j] = wrap_angle(s.theta[j]);
    tr.theta.push_back(th);
    tr.H.push_back(sys.energy(s.I, th));
  };
  record(0.0);
  const auto steps = static_cast<std::size_t>(std::ceil(spec.t_end / spec.dt - 1e-9));
  for (std::size_t i = 1; i <= steps; ++i) {
    stepper.step(s, spec.dt);
    const double t = static_cast<double>(i) * spec.dt;
    bool out = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(s.I[j]) || !std::isfinite(s.theta[j]))
        throw IntegrationError("integrate: state is not finite at t = " + core::format_double(t));
      out = out || !(std::abs(s.I[j]) <= spec.action_bound);
    }
    if (out) {
      record(t);
      tr.exited = true;
      tr.exit_time = t;
      break;
    }
    if (i % spec.stride == 0) {
      for (auto& v : s.theta) v = wrap_angle(v);
      record(t);
    } else if (i == steps) {
      record(t);
    }
  }
  return tr;
}

double max_drift(const Trajectory& traj, double T) {
  if (traj.t.empty()) return 0.0;
  if (T > traj.t.back() * (1.0 + 1e-12) + 1e-12 && !traj.exited)
    throw DomainError("max_drift: horizon beyond the trajectory span");
  double best = 0.0;
  const auto& I0 = traj.I.front();
  for (std::size_t i = 0; i < traj.t.size() && traj.t[i] <= T; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < I0.size(); ++j) d += (traj.I[i][j] - I0[j]) * (traj.I[i][j] - I0[j]);
    best = std::max(best, std::sqrt(d));
  }
  return best;
}

std::optional<double> escape_time(const Trajectory& traj, std::size_t id, const geography::Geography& geo,
                                  double resolution, std::size_t node_budget) {
  const double rho = geo.schedule().rho;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const geography::Vec I = to_vec(traj.I[i]);
    if (geo.in_ball(I, rho) && geo.in_block(I, id)) continue;
    bool member = false;
    try {
      member = geo.extended_block(I, id, resolution, node_budget).member;
    } catch (const BudgetError&) {
      // An unexplored disc cannot be ruled out.
      member = true;
    }
    if (!member) return traj.t[i];
  }
  return std::nullopt;
}

std::vector<ItineraryEntry> block_itinerary(const Trajectory& traj, const geography::Geography& geo) {
  std::vector<ItineraryEntry> out;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const geography::Vec I = to_vec(traj.I[i]);
    ItineraryEntry e;
    e.t_begin = traj.t[i];
    e.t_end = traj.t[i];
    if (geo.in_ball(I)) {
      e.block = geo.classify(I);
    } else {
      e.outside = true;
    }
    if (!out.empty() && out.back().outside == e.outside &&
        (e.outside || (out.back().block.lattice_id == e.block.lattice_id &&
                       out.back().block.multiplicity == e.block.multiplicity))) {
      out.back().t_end = traj.t[i];
      continue;
    }
    if (!out.empty()) out.back().t_end = traj.t[i];
    out.push_back(std::move(e));
  }
  return out;
}

json ExponentFit::to_json() const {
  return json{{"slope", slope},
              {"intercept", intercept},
              {"slope_stderr", slope_stderr},
              {"slope_band", {slope_low, slope_high}},
              {"rms_residual", rms_residual},
              {"residuals", residuals},
              {"ell", ell}};
}

ExponentFit fit_exponents(const std::vector<double>& eps, const std::vector<double>& values, double ell) {
  if (eps.size() != values.size()) throw DomainError("fit_exponents: size mismatch");
  if (eps.size() < 4) throw DomainError("fit_exponents: at least 4 values of epsilon are needed");
  const auto [lo, hi] = std::minmax_element(eps.begin(), eps.end());
  if (!(*lo > 0.0) || std::log10(*hi / *lo) < 2.0 - 1e-12)
    throw DomainError("fit_exponents: epsilon values must be positive and span 2 decades");
  std::vector<double> y = values;
  if (ell > 0.0)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= std::pow(std::abs(std::log(eps[i])), ell - 1.0);
  const auto lf = core::fit_loglog(eps, y);
  ExponentFit f;
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.slope_stderr = lf.slope_stderr;
  const double q = t_quantile_95(eps.size() - 2);
  f.slope_low = lf.slope - q * lf.slope_stderr;
  f.slope_high = lf.slope + q * lf.slope_stderr;
  f.rms_residual = lf.rms_residual;
  f.residuals = lf.residuals;
  f.ell = ell;
  return f;
}

geography::Prefactors convex3_stability_prefactors() {
  geography::Prefactors p = geography::convex3_prefactors();
  p.c_T = 1e5;
  return p;
}

json StabilityConfig::to_json() const {
  return json{{"system", shape ? "custom" : system},
              {"eps", eps},
              {"eps0", eps0},
              {"alpha", alpha},
              {"ell", ell},
              {"M", M},
              {"prefactors", prefactors.to_json()},
              {"center", center},
              {"ic_radius", ic_radius},
              {"initial_conditions", initial_conditions},
              {"dt", dt},
              {"max_steps", max_steps},
              {"stride", stride},
              {"seed", seed},
              {"threads", threads},
              {"itineraries", itineraries},
              {"budget_secs", budget_secs}};
}

void DriftReport::write_csv(std::ostream& os) const {
  os << "epsilon,horizon,max_drift,escape_time,itinerary_len\n";
  for (const auto& r : records) {
    os << core::format_double(r.eps) << ',' << core::format_double(r.horizon) << ','
       << core::format_double(r.max_drift) << ',' << (r.escape_time ? core::format_double(*r.escape_time) : "")
       << ',' << r.itinerary_len << '\n';
  }
}

json DriftReport::to_json() const {
  json recs = json::array();
  for (const auto& r : records)
    recs.push_back(json{{"eps", r.eps},
                        {"T0", r.T0},
                        {"horizon", r.horizon},
                        {"truncated", r.truncated},
                        {"bound_status", r.truncated ? "not falsified up to t_max" : "verified"},
                        {"max_drift", r.max_drift},
                        {"energy_error", r.energy_error},
                        {"escape_time", r.escape_time ? json(*r.escape_time) : json(nullptr)},
                        {"itinerary_len", r.itinerary_len},
                        {"start_multiplicity", r.start_multiplicity}});
  return json{{"records", recs}, {"fit", fit.to_json()}, {"b", b},         {"C", C},
              {"C_ratio", C_ratio}, {"stride", stride},  {"dt", dt}};
}

std::vector<State> initial_conditions(const std::vector<double>& center, double radius, std::size_t count,
                                      std::uint64_t seed) {
  if (!(radius >= 0.0)) throw DomainError("initial_conditions: negative radius");
  const std::size_t n = center.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<State> out;
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> dir(n);
    double norm = 0.0;
    for (auto& v : dir) {
      v = g(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    const double r = radius * std::pow(u(rng), 1.0 / static_cast<double>(n));
    State s;
    s.I.resize(n);
    s.theta.resize(n);
    for (std::size_t j = 0; j < n; ++j) s.I[j] = center[j] + (norm > 0.0 ? r * dir[j] / norm : 0.0);
    for (auto& t : s.theta) t = kTwoPi * u(rng);
    out.push_back(std::move(s));
  }
  return out;
}

DriftReport stability_sweep(const StabilityConfig& cfg) {
  if (cfg.eps.empty()) throw DomainError("stability_sweep: sweep non-empty required");
  if (cfg.initial_conditions == 0) throw DomainError("stability_sweep: need at least one initial condition");
  if (cfg.max_steps == 0) throw DomainError("stability_sweep: max_steps must be positive");
  const auto params = geography::geography_params(cfg.center.size(), cfg.alpha, cfg.ell);
  const auto ics = initial_conditions(cfg.center, cfg.ic_radius, cfg.initial_conditions, cfg.seed);
  const std::size_t ne = cfg.eps.size(), ni = ics.size();

  DriftReport rep;
  rep.b = params.b;
  rep.stride = cfg.stride;
  rep.dt = cfg.dt;
  rep.records.resize(ne);
  std::vector<geography::Schedule> scheds;
  for (std::size_t e = 0; e < ne; ++e) {
    scheds.push_back(geography::make_schedule(cfg.eps[e], cfg.eps0, params, cfg.M, cfg.prefactors));
    auto& r = rep.records[e];
    r.eps = cfg.eps[e];
    r.T0 = scheds.back().T0();
    const double cap = static_cast<double>(cfg.max_steps) * cfg.dt;
    r.horizon = std::min(r.T0, cap);
    r.truncated = r.T0 > cap;
  }

  std::vector<double> drift(ne * ni, 0.0), energy(ne * ni, 0.0);
  std::vector<std::optional<double>> escape(ne);
  std::vector<std::size_t> itin(ne, 0), mult(ne, 0);
  const auto started = std::chrono::steady_clock::now();
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::vector<std::exception_ptr> errors(ne * ni);
  auto work = [&] {
    for (std::size_t task = next++; task < ne * ni && !abort; task = next++) {
      try {
        const std::size_t e = task / ni, i = task % ni;
        if (cfg.budget_secs > 0.0 &&
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() > cfg.budget_secs)
          throw BudgetError("stability_sweep: wall-clock budget exceeded", static_cast<long long>(task));
        System sys;
        if (cfg.shape) {
          sys.h = cfg.shape->h;
          sys.f = cfg.shape->f * cplx(cfg.eps[e]);
        } else {
          sys = benchmark_system(cfg.system, cfg.eps[e]);
        }
        IntegratorSpec spec;
        spec.dt = cfg.dt;
        spec.t_end = rep.records[e].horizon;
        spec.stride = cfg.stride;
        spec.seed = cfg.seed;
        const Trajectory tr = integrate(sys, ics[i], spec);
        drift[task] = max_drift(tr, tr.t.back());
        energy[task] = tr.energy_error();
        if (i == 0 && cfg.itineraries) {
          const auto omega = steepness::FrequencyMap::from_polynomial(sys.h, to_vec(cfg.center), 0.5);
          const geography::Geography geo(scheds[e], omega, to_vec(cfg.center));
          const auto it = block_itinerary(tr, geo);
          itin[e] = it.size();
          if (!it.empty() && !it.front().outside) {
            mult[e] = it.front().block.multiplicity;
            escape[e] = escape_time(tr, it.front().block.lattice_id, geo);
          }
        }
      } catch (...) {
        errors[task] = std::current_exception();
        abort = true;
      }
    }
  };
  const std::size_t nt = std::max<std::size_t>(1, std::min(cfg.threads, ne * ni));
  if (nt == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(work);
  }
  for (const auto& ep : errors)
    if (ep) std::rethrow_exception(ep);

  std::vector<double> d(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    auto& r = rep.records[e];
    for (std::size_t i = 0; i < ni; ++i) {
      r.max_drift = std::max(r.max_drift, drift[e * ni + i]);
      r.energy_error = std::max(r.energy_error, energy[e * ni + i]);
    }
    r.escape_time = escape[e];
    r.itinerary_len = itin[e];
    r.start_multiplicity = mult[e];
    d[e] = r.max_drift;
  }
  const std::size_t top = static_cast<std::size_t>(std::max_element(cfg.eps.begin(), cfg.eps.end()) - cfg.eps.begin());
  rep.C = d[top] / std::pow(cfg.eps[top], rep.b);
  for (std::size_t e = 0; e < ne; ++e)
    rep.C_ratio = std::max(rep.C_ratio, rep.C > 0.0 ? d[e] / (rep.C * std::pow(cfg.eps[e], rep.b)) : 0.0);
  if (ne >= 4) rep.fit = fit_exponents(cfg.eps, d);
  return rep;
}

}  // namespace neklab::dynamics
