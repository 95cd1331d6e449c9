#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "neklab/core/io.hpp"
#include "neklab/geography/lattice.hpp"
#include "neklab/steepness/steepness.hpp"

namespace neklab::geography {

using steepness::FrequencyMap;
using steepness::Mat;
using steepness::Vec;

struct GeographyParams {
  std::size_t n = 0;
  std::vector<double> alpha;  // α₁ … α_{n−1}
  double ell = 0.0;
  std::vector<double> p;  // p₁ … p_n
  std::vector<double> q;  // q₁ … q_n
  std::vector<double> c;  // c₁ … c_{n−1}
  double a = 0.0;
  double b = 0.0;
  double a_thm = 0.0;
  double b_thm = 0.0;

  /// Accessors with the 1-based indices of the formulas.
  double p_at(std::size_t j) const { return p.at(j - 1); }
  double q_at(std::size_t j) const { return q.at(j - 1); }
  double alpha_at(std::size_t j) const { return alpha.at(j - 1); }

  core::json to_json() const;
};

GeographyParams geography_params(std::size_t n, const std::vector<double>& alpha, double ell);

/// Multiplicative constants in front of every scale. `c_delta[j−1]` is used
/// for lattices of rank j; a shorter vector is extended with its last entry.
struct Prefactors {
  double c_s = 1e-2;
  double c_r = 1.0;
  double c_R = 1.0;
  std::vector<double> c_delta{1.0};
  double c_alpha = 1.0;
  double c_rj = 1.0;
  double c_T = 1.0;
  double c_TL = 1.0;

  double delta_for_rank(std::size_t j) const;
  core::json to_json() const;
  static Prefactors from_json(const core::json& j);
};

struct Schedule {
  GeographyParams params;
  Prefactors prefactors;
  double eps = 0.0;
  double eps0 = 0.0;
  double M = 1.0;
  double K = 1.0;
  double s = 0.0;
  double r = 0.0;
  double R = 0.0;
  double rho = 0.0;
  std::vector<std::string> warnings;

  /// δ_Λ = c_δ / (|Λ| K^{q_j}).
  double delta(std::size_t j, double covolume) const;
  double delta(const Lattice& L) const { return delta(L.rank(), L.covolume()); }
  /// r_Λ = δ_Λ / M.
  double r_lambda(const Lattice& L) const { return delta(L) / M; }
  /// α_Λ = c_α / (|Λ| K^{q_j − c_j}).
  double alpha_lambda(const Lattice& L) const;
  /// r_j = c_rj K^{−q_j/α_j}.
  double r_j(std::size_t j) const;
  /// Stability time of the non-resonant block.
  double T0() const;
  /// Stability time of the block of Λ.
  double T_lambda(const Lattice& L) const;

  core::json to_json() const;
};

Schedule make_schedule(double eps, double eps0, const GeographyParams& params, double M,
                       const Prefactors& prefactors = Prefactors{});

/// Block label: multiplicity j and the lattice (absent for j = 0).
struct BlockId {
  std::size_t multiplicity = 0;
  std::optional<Lattice> lattice;
  /// Position in the owning Geography's lattice list (0 is the trivial lattice).
  std::size_t lattice_id = 0;

  core::json to_json() const;
};

/// Zone, block and extended-block membership with the schedule's ball
/// B₂(I₀, R). The free functions recompute everything from scratch; the
/// Geography class precomputes the lattices and an index from short vectors
/// to the lattices containing them.
bool zone_membership(const Vec& I, const Lattice& L, const Schedule& sched, const FrequencyMap& omega);
bool block_membership(const Vec& I, const Lattice& L, const Schedule& sched, const FrequencyMap& omega);

struct ExtendedResult {
  bool member = false;
  double resolution = 0.0;
  std::size_t nodes = 0;
  /// Largest distance from the start among visited nodes.
  double reach = 0.0;
};

struct CoverageReport {
  std::size_t samples = 0;
  std::size_t covered = 0;
  double coverage = 0.0;
  std::vector<std::size_t> histogram;
  /// Points where the indexed classification and the direct scan disagree.
  std::vector<Vec> mismatches;
  std::vector<Vec> failures;

  core::json to_json() const;
};

struct DisjointnessViolation {
  Vec I;
  std::size_t lattice = 0;
  std::size_t other = 0;
};

struct SmallDivisorViolation {
  Vec I;
  std::size_t lattice = 0;
  IntVec k;
  double divisor = 0.0;
  double bound = 0.0;
};

inline constexpr std::size_t kMaxWitnesses = 32;

struct DisjointnessReport {
  std::size_t samples = 0;
  std::size_t attempts = 0;
  std::size_t lattices_sampled = 0;
  std::size_t violation_count = 0;
  std::size_t small_divisor_count = 0;
  /// Witnesses, at most `kMaxWitnesses` of each kind.
  std::vector<DisjointnessViolation> violations;
  std::vector<SmallDivisorViolation> small_divisor_violations;
  /// min over samples of |k·ω|·|Λ|·K^{q_j−c_j}: the largest admissible c_α.
  double alpha_constant = 0.0;
  /// max over samples of disc reach·K^{q_j/α_j}: the fitted constant of the disc-size bound.
  double rj_constant = 0.0;
  bool calibration_flag = false;

  core::json to_json() const;
};

class Geography {
 public:
  Geography(Schedule sched, FrequencyMap omega, Vec I0, std::size_t lattice_budget = 20'000'000);

  const Schedule& schedule() const noexcept { return sched_; }
  const FrequencyMap& omega() const noexcept { return omega_; }
  const Vec& center() const noexcept { return I0_; }
  std::size_t dim() const noexcept { return n_; }
  /// All lattices of rank 0 … n−1 in canonical order; id 0 is {0}.
  const std::vector<Lattice>& lattices() const noexcept { return lattices_; }
  std::vector<std::size_t> lattices_of_rank(std::size_t j) const;
  std::size_t find(const Lattice& L) const;

  bool in_ball(const Vec& I, double shrink = 0.0) const;
  bool in_zone(const Vec& I, std::size_t id) const;
  bool in_block(const Vec& I, std::size_t id) const;
  /// Ids of every rank-j lattice whose zone contains I.
  std::vector<std::size_t> zones_containing(const Vec& I, std::size_t j) const;
  BlockId classify(const Vec& I) const;
  /// The same classification by a direct scan over every lattice.
  BlockId classify_direct(const Vec& I) const;

  /// Flood fill on the grid I + resolution·ℤʲ of the drift plane I + ⟨Λ⟩;
  /// resolution ≤ 0 selects r_Λ/(8K).
  /// With `exhaust` the whole component is visited so `reach` measures it.
  ExtendedResult extended_block(const Vec& I, std::size_t id, double resolution = 0.0,
                                std::size_t node_budget = 200'000, bool exhaust = false) const;

  /// Seeded sample of Z_Λ ∩ B(I₀, R−ρ) (Newton projection onto the resonant
  /// manifold plus a random offset); nullopt when the zone looks empty.
  std::optional<Vec> sample_zone(std::size_t id, std::uint64_t seed, std::size_t tries = 64) const;

  CoverageReport covering_check(std::size_t samples, std::uint64_t seed = 0) const;
  /// Samples of the extended block of `a` tested against the zone of `b`.
  DisjointnessReport disjointness_check(std::size_t a, std::size_t b, std::size_t samples,
                                        std::uint64_t seed = 0) const;
  /// Samples spread over every lattice of rank 1 … n−1 with a nonempty zone,
  /// each tested against every other zone of the same rank.
  DisjointnessReport disjointness_all(std::size_t samples, std::uint64_t seed = 0) const;

  /// Rows "I1,…,In,multiplicity,lattice_id" for uniform samples of the ball.
  void write_samples_csv(std::ostream& os, std::size_t samples, std::uint64_t seed = 0) const;

 private:
  std::size_t n_;
  Schedule sched_;
  FrequencyMap omega_;
  Vec I0_;
  std::vector<Lattice> lattices_;
  std::vector<double> delta_;
  std::vector<IntVec> kvecs_;
  Mat kmat_;  // short vectors as rows
  std::vector<std::vector<std::size_t>> members_;    // lattice → short vector ids
  std::vector<std::vector<std::size_t>> index_;      // short vector → lattice ids
  std::vector<double> max_delta_of_rank_;

  Vec divisors(const Vec& I) const;
  bool zone_from(const Vec& div, std::size_t id) const;
  std::vector<std::size_t> zones_from(const Vec& div, std::size_t j) const;
  Vec random_ball_point(std::uint64_t& state, double radius) const;
  void sample_extended(std::size_t id, std::uint64_t seed, std::size_t samples, DisjointnessReport& rep,
                       const std::vector<std::size_t>& others) const;
};

/// Largest global multiplier λ (applied to the rank weights `weights`) for
/// which disjointness_all finds no violation at every ε given, found by
/// bisection on [lo, hi]; the returned prefactors use λ·safety.
struct CalibrationResult {
  Prefactors prefactors;
  double lambda = 0.0;
  std::size_t iterations = 0;
  core::json to_json() const;
};

CalibrationResult calibrate_prefactors(const GeographyParams& params, const FrequencyMap& omega, const Vec& I0,
                                       double eps0, const std::vector<double>& eps_values,
                                       const Prefactors& base, const std::vector<double>& weights,
                                       std::size_t samples, std::uint64_t seed, double lo = 1e-4,
                                       double hi = 10.0, std::size_t iterations = 10, double safety = 0.5);

/// Rank weights 4^{j−(n−1)} for c_δ: lower ranks get thinner zones so that a
/// disc of width r_Λ cannot cross into another zone of the same rank.
std::vector<double> default_rank_weights(std::size_t n);

/// Prefactors calibrated on the convex benchmark |I|²/2 around (0, 0, 1) with
/// ε₀ = 1 and ε ∈ {10⁻², 10⁻³, 10⁻⁴}.
Prefactors convex3_prefactors();

/// JSON geography report {params, schedule, coverage, violations}.
core::json geography_report(const Geography& g, const CoverageReport& cov, const DisjointnessReport& dis);

}  // namespace neklab::geography
