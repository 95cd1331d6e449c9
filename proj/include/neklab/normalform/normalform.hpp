#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "neklab/core/grid_function.hpp"
#include "neklab/core/io.hpp"
#include "neklab/core/trig_poly.hpp"
#include "neklab/geography/geography.hpp"

namespace neklab::normalform {

using core::DomainSpec;
using core::MultiIndex;
using core::Polynomial;
using core::TrigPoly;
using geography::Lattice;

struct Thresholds {
  double eps = 0.0;
  double alpha = 0.0;
  double rho = 0.0;    // ϱ
  double rho_p = 0.0;  // ϱ′
  double sigma = 0.0;
  double K = 0.0;
  double xi = 1.0;
  double M = 0.0;

  void validate() const;
  core::json to_json() const;
};

/// Each margin is a ratio that must be ≥ 1.
struct ThresholdReport {
  bool pass = false;
  double eps_margin = 0.0;    // (αϱ′/(256ξK)) / ε
  double rho_margin = 0.0;    // min(ϱ, α/(2ξMK)) / ϱ′
  double ksigma_margin = 0.0; // Kσ/6

  core::json to_json() const;
};

ThresholdReport check_thresholds(const Thresholds& t);

/// ϱ′ ← r, ϱ ← s, σ ← s, K ← K with the schedule's ε and M.
Thresholds thresholds_from_schedule(const geography::Schedule& sched, double alpha, double xi);

/// Keeps exactly the harmonics k ∈ Λ with |k|₁ ≤ K (k = 0 included).
TrigPoly project_resonant(const TrigPoly& f, const Lattice& L, double K);
/// Keeps the harmonics with |k|₁ ≤ K.
TrigPoly project_cutoff(const TrigPoly& f, double K);
bool in_lattice(const MultiIndex& k, const Lattice& L);

/// ‖f‖ at the widths (ϱ, σ) of `dom`: sup over complex actions of Σ|f̂_k|e^{|k|₁σ}.
double perturbation_size(const TrigPoly& f, const DomainSpec& dom, std::size_t nodes_per_axis = 8);

struct HomologicalOptions {
  /// Degree of the least-squares fit in the actions when division is not exact.
  int fit_degree = 12;
  /// Real nodes per axis used for the small-divisor check.
  std::size_t check_nodes = 9;
};

struct HomologicalResult {
  TrigPoly chi;
  int degree = 0;
  /// Largest relative fit residual over the harmonics (0 when every division was exact).
  double fit_residual = 0.0;
  bool exact = true;
};

/// χ̂_k = f̂_k / (i k·ω(I)), so that {h, χ} = f_nr and the time-one flow of χ
/// removes f_nr. Coefficients are fitted on the box B_∞(c, R + ϱ).
HomologicalResult solve_homological(const Polynomial& h, const TrigPoly& f_nr, const Lattice& L, double K,
                                    const DomainSpec& dom, double alpha,
                                    const HomologicalOptions& opt = HomologicalOptions{});

struct NormalizeOptions {
  /// 0 selects ⌈Kσ/6⌉.
  std::size_t steps = 0;
  /// Highest power of the Lie derivative kept in each step.
  int lie_order = 3;
  HomologicalOptions homological;
  /// Monomial coefficients below prune_relative·ε are dropped after each
  /// step. High powers of I carry small coefficients that still matter on
  /// the domain, so the default keeps everything.
  double prune_relative = 0.0;
  std::size_t norm_nodes = 8;
  bool enforce_thresholds = true;
};

struct Diagnostics {
  double eps_measured = 0.0;
  double remainder_norm = 0.0;
  double remainder_bound = 0.0;
  double remainder_factor = 0.0;
  double g_distance = 0.0;
  double g_bound = 0.0;
  double g_factor = 0.0;
  std::vector<double> step_norms;
  std::vector<double> fit_residuals;
  std::vector<double> tail_norms;
  /// Set when the iteration stopped early at the fit residual floor.
  bool stalled = false;
  std::vector<MultiIndex> remainder_support;
  ThresholdReport thresholds;

  core::json to_json() const;
};

struct NormalFormResult {
  TrigPoly g;
  TrigPoly f_star;
  std::vector<TrigPoly> generators;
  Diagnostics diagnostics;

  core::json to_json() const;
};

/// Iterated Lie transforms: each step solves the homological equation for the
/// non-resonant harmonics with |k|₁ ≤ K and applies exp(L_χ) truncated at
/// `lie_order`. Returns h + g + f* = H∘Ψ up to the truncation tails.
NormalFormResult normalize(const Polynomial& h, const TrigPoly& f, const Lattice& L, const Thresholds& t,
                           const DomainSpec& dom, const NormalizeOptions& opt = NormalizeOptions{});

/// Ψ = Φ¹_{χ₁} ∘ … ∘ Φ¹_{χ_N}, each flow integrated by classical RK4.
class Transform {
 public:
  Transform(const std::vector<TrigPoly>& generators, std::size_t rk_steps = 16);
  std::size_t dim() const noexcept { return n_; }
  /// Maps (I, θ) in place.
  void apply(std::vector<double>& I, std::vector<double>& theta) const;

 private:
  struct Field {
    std::vector<TrigPoly> dI;
    std::vector<TrigPoly> dtheta;
  };
  void flow(const Field& f, std::vector<double>& I, std::vector<double>& theta) const;

  std::size_t n_ = 0;
  std::size_t rk_steps_;
  std::vector<Field> fields_;
};

struct VerifyReport {
  double energy_defect = 0.0;
  double action_ratio = 0.0;  // max |Π_I Ψ − I|₂ / ϱ′
  double action_bound = 0.0;  // 1/(32ξ)
  double angle_ratio = 0.0;   // max |Π_θ Ψ − θ|_∞ / σ
  double angle_bound = 0.0;   // 1/(24ξ)
  double symplectic_defect = 0.0;
  bool support_exact = false;
  /// max |{h, g}| at probes moved onto the resonant slice k·ω = 0, k ∈ Λ.
  double commutation_defect = 0.0;
  std::size_t probes = 0;
  std::uint64_t seed = 0;

  core::json to_json() const;
};

VerifyReport verify_normalform(const NormalFormResult& result, const Polynomial& h, const TrigPoly& f,
                               const Lattice& L, const Thresholds& t, const DomainSpec& dom,
                               std::size_t probes = 16, std::uint64_t seed = 0, double fd_step = 1e-5);

using PhaseFunction = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

/// max |H∘Ψ − H_s∘Ψ − (H − H_s)∘Ψ| at seeded probes of the real domain.
double composition_identity_defect(const PhaseFunction& H, const PhaseFunction& Hs, const Transform& psi,
                                   const DomainSpec& dom, std::size_t probes, std::uint64_t seed);

/// Benchmarks used in tests and the command line tool: "pendulum1" (n = 1,
/// h = I²/2, f = ε cos θ, Λ = {0}, K = 1, I ∈ [1.25, 1.75]) and "resonant2" (n = 2,
/// h = |I|²/2, f = ε cos(θ₁ − θ₂) + ε cos θ₁, Λ = span(1, −1), K = 2, I near (1, 1)).
struct Benchmark {
  Polynomial h;
  TrigPoly f;
  Lattice lattice;
  Thresholds thresholds;
  DomainSpec domain;
};

/// The raw amplitude ε is chosen as `eps_fraction` times the largest value
/// the thresholds allow.
Benchmark benchmark(const std::string& name, double eps_fraction = 0.5);

}  // namespace neklab::normalform
