#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "neklab/core/io.hpp"
#include "neklab/core/trig_poly.hpp"
#include "neklab/geography/geography.hpp"

namespace neklab::dynamics {

using core::Polynomial;
using core::TrigPoly;

/// H = h(I) + f(I, θ) with polynomial h.
struct System {
  Polynomial h;
  TrigPoly f;

  std::size_t dim() const noexcept { return h.nvars(); }
  bool angle_only() const noexcept { return f.is_angle_only(); }
  double energy(const std::vector<double>& I, const std::vector<double>& theta) const;
};

/// "pendulum" (h = I²/2, f = ε cos θ), "channel" (h = (I₁² − I₂²)/2,
/// f = ε sin(θ₁ − θ₂)) and "convex3" (h = |I|²/2,
/// f = ε(cos θ₁ + cos(θ₁ − θ₂) + cos(θ₂ − θ₃))).
System benchmark_system(const std::string& name, double eps);
std::vector<std::string> benchmark_system_names();

enum class Scheme { automatic, splitting, implicit_midpoint };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct IntegratorSpec {
  Scheme scheme = Scheme::automatic;
  double dt = 0.05;
  double t_end = 1.0;
  /// Fixed-point tolerance of the implicit scheme.
  double tolerance = 1e-13;
  std::size_t max_iterations = 100;
  /// Steps between stored samples.
  std::size_t stride = 100;
  /// Integration stops once some |I_j| exceeds this bound.
  double action_bound = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  void validate() const;
  core::json to_json() const;
};

struct State {
  std::vector<double> I;
  std::vector<double> theta;
};

/// One step of either scheme. Splitting is the symmetric composition
/// kick(dt/2) ∘ drift(dt) ∘ kick(dt/2) of the exact flows of f(θ) and h(I).
class Stepper {
 public:
  Stepper(const System& sys, const IntegratorSpec& spec);
  Scheme scheme() const noexcept { return scheme_; }
  void step(State& s, double dt) const;

 private:
  struct Term {
    std::vector<double> k;
    core::cplx c;
  };
  void omega(const std::vector<double>& I, std::vector<double>& w) const;
  void kick(State& s, double dt) const;
  void vector_field(const std::vector<double>& I, const std::vector<double>& th, std::vector<double>& dI,
                    std::vector<double>& dth) const;

  std::size_t n_;
  Scheme scheme_;
  double tolerance_;
  std::size_t max_iterations_;
  std::vector<Polynomial> omega_;
  std::vector<Term> terms_;
  std::vector<TrigPoly> f_theta_;
  std::vector<TrigPoly> f_action_;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> I;
  /// Reduced to [0, 2π).
  std::vector<std::vector<double>> theta;
  std::vector<double> H;
  double dt = 0.0;
  std::size_t stride = 0;
  Scheme scheme = Scheme::splitting;
  bool exited = false;
  double exit_time = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const noexcept { return t.size(); }
  /// Header "t,I1..In,theta1..thetan,H".
  void write_csv(std::ostream& os) const;
  /// max |H(t) − H(0)| over the samples.
  double energy_error() const;
};

Trajectory integrate(const System& sys, const State& s0, const IntegratorSpec& spec);

/// sup over samples t ≤ T of |I(t) − I(0)|₂.
double max_drift(const Trajectory& traj, double T);

/// First sample time at which I(t) leaves the extended block of lattice `id`.
std::optional<double> escape_time(const Trajectory& traj, std::size_t id, const geography::Geography& geo,
                                  double resolution = 0.0, std::size_t node_budget = 20'000);

struct ItineraryEntry {
  double t_begin = 0.0;
  double t_end = 0.0;
  geography::BlockId block;
  /// Samples outside the geography ball carry no block.
  bool outside = false;
};

/// Consecutive samples with the same block are merged; the intervals
/// partition [t₀, t_last].
std::vector<ItineraryEntry> block_itinerary(const Trajectory& traj, const geography::Geography& geo);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  /// 95% band for the slope (Student t quantile).
  double slope_low = 0.0;
  double slope_high = 0.0;
  double rms_residual = 0.0;
  std::vector<double> residuals;
  double ell = 0.0;

  core::json to_json() const;
};

/// Log-log slope of `values` against ε. With ell > 0 the values are first
/// multiplied by |ln ε|^{ℓ−1}, which removes the logarithmic factor of the
/// stability times.
ExponentFit fit_exponents(const std::vector<double>& eps, const std::vector<double>& values, double ell = 0.0);

/// The calibrated convex prefactors with c_T = 10⁵, which puts T₀(10⁻⁴) at
/// about 10⁷ steps of size 0.05.
geography::Prefactors convex3_stability_prefactors();

struct StabilityConfig {
  std::string system = "convex3";
  /// h and the unit perturbation f; when set, replaces `system` and each
  /// sweep point integrates h + εf.
  std::optional<System> shape;
  std::vector<double> eps{1e-2, std::pow(10.0, -2.5), 1e-3, std::pow(10.0, -3.5), 1e-4};
  double eps0 = 1.0;
  std::vector<double> alpha{1.0, 1.0};
  double ell = 4.0;
  /// Bound on the Hessian of h used by the schedule.
  double M = 1.0;
  geography::Prefactors prefactors = convex3_stability_prefactors();
  std::vector<double> center{0.0, 0.0, 1.0};
  double ic_radius = 0.1;
  std::size_t initial_conditions = 4;
  double dt = 0.05;
  std::size_t max_steps = 10'000'000;
  std::size_t stride = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Classify the first trajectory of every ε along the geography.
  bool itineraries = true;
  /// Wall-clock budget checked between trajectories (0 disables it); BudgetError when exceeded.
  double budget_secs = 0.0;

  core::json to_json() const;
};

struct DriftRecord {
  double eps = 0.0;
  double T0 = 0.0;
  double horizon = 0.0;
  /// The horizon was capped by max_steps: the bound is only "not falsified up to t_max".
  bool truncated = false;
  double max_drift = 0.0;
  double energy_error = 0.0;
  std::optional<double> escape_time;
  std::size_t itinerary_len = 0;
  std::size_t start_multiplicity = 0;
};

struct DriftReport {
  std::vector<DriftRecord> records;
  ExponentFit fit;
  /// Target exponent and the constant set at the largest ε.
  double b = 0.0;
  double C = 0.0;
  /// max over ε of drift / (C ε^b).
  double C_ratio = 0.0;
  std::size_t stride = 0;
  double dt = 0.0;

  /// Header "epsilon,horizon,max_drift,escape_time,itinerary_len".
  void write_csv(std::ostream& os) const;
  core::json to_json() const;
};

/// Seeded initial conditions in B₂(center, radius) × 𝕋ⁿ.
std::vector<State> initial_conditions(const std::vector<double>& center, double radius, std::size_t count,
                                      std::uint64_t seed);

/// Drift sweep over ε: each (ε, initial condition) trajectory runs over
/// min(T₀(ε), max_steps·dt); trajectories are distributed over `threads`
/// workers and merged by index.
DriftReport stability_sweep(const StabilityConfig& cfg);

}  // namespace neklab::dynamics
