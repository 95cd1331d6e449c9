#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "neklab/core/io.hpp"
#include "neklab/core/polynomial.hpp"

namespace neklab::steepness {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// ω = ∇h and D²h on the box B_∞(center, radius).
class FrequencyMap {
 public:
  using VecFn = std::function<Vec(const Vec&)>;
  using MatFn = std::function<Mat(const Vec&)>;

  FrequencyMap(std::size_t n, VecFn omega, MatFn hessian, Vec center, double radius);

  /// ω and the Hessian from the derivatives of a real polynomial h.
  static FrequencyMap from_polynomial(const core::Polynomial& h, Vec center, double radius);

  std::size_t dim() const noexcept { return n_; }
  Vec omega(const Vec& I) const { return omega_(I); }
  Mat hessian(const Vec& I) const { return hessian_(I); }
  const Vec& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }
  bool contains(const Vec& I, double slack = 1e-12) const;

  /// Sup of the Hessian operator norm over a grid of the domain (5 nodes per
  /// axis up to n = 4, seeded random points beyond).
  double hessian_bound() const;
  /// Largest gap between the Hessian and central differences of ω at `samples`
  /// seeded random points.
  double consistency_defect(std::size_t samples = 16, std::uint64_t seed = 1) const;

  /// h∘Qᵀ for orthogonal Q: ω ↦ Q ω(Qᵀ·), D²h ↦ Q D²h Qᵀ, centre ↦ Q centre.
  FrequencyMap rotated(const Mat& Q) const;
  /// λh.
  FrequencyMap scaled(double lambda) const;

 private:
  std::size_t n_;
  VecFn omega_;
  MatFn hessian_;
  Vec center_;
  double radius_;
};

/// Orthonormal basis (columns) of an m-dimensional subspace, 1 ≤ m < n.
struct SubspaceFrame {
  Mat basis;

  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
  std::size_t ambient() const { return static_cast<std::size_t>(basis.rows()); }
  void validate(double tol = 1e-12) const;
  static SubspaceFrame span(const std::vector<Vec>& vectors);
};

/// min over u ∈ Γ, |u|₂ = η of |π_Γ ω(I + u)|₂: sphere samples followed by
/// projected-gradient refinement from the best samples.
double min_projection(const FrequencyMap& map, const Vec& I, const SubspaceFrame& gamma, double eta,
                      std::size_t sphere_samples = 64);

/// max over η ∈ {ξ/N, 2ξ/N, …, ξ} of min_projection.
double steepness_margin(const FrequencyMap& map, const Vec& I, const SubspaceFrame& gamma, double xi,
                        std::size_t eta_samples = 8, std::size_t sphere_samples = 64);

/// Margins at several ξ from one pool of η values (the union of every ξ's
/// grid), so the result is non-decreasing in ξ by construction.
std::vector<double> margin_profile(const FrequencyMap& map, const Vec& I, const SubspaceFrame& gamma,
                                   const std::vector<double>& xis, std::size_t eta_samples = 8,
                                   std::size_t sphere_samples = 64);

struct SteepnessProfile {
  std::vector<double> alpha;
  std::vector<double> C;
  double delta = 0.0;
  std::vector<double> residuals;
  std::vector<bool> clamped;
  std::uint64_t seed = 0;
  core::json budget;

  void validate() const;
  core::json to_json() const;
  static SteepnessProfile from_json(const core::json& j);
};

struct SteepnessViolation {
  std::size_t multiplicity = 0;
  Vec I;
  SubspaceFrame gamma;
  double eta = 0.0;
  double margin = 0.0;

  core::json to_json() const;
};

struct WorstCase {
  std::size_t multiplicity = 0;
  Vec I;
  SubspaceFrame gamma;
  std::vector<double> xis;
  std::vector<double> margins;
};

struct EstimateOptions {
  /// Regular grid nodes per axis on the sampling box (odd keeps the centre).
  std::size_t grid_nodes = 3;
  std::size_t random_points = 16;
  /// Explicit points replace the grid and random points when non-empty.
  std::vector<Vec> points;
  std::size_t frames_per_multiplicity = 16;
  bool coordinate_frames = true;
  double xi_max = 0.1;
  std::size_t xi_points = 8;
  double xi_decades = 2.0;
  std::size_t eta_samples = 8;
  std::size_t sphere_samples = 64;
  double omega_floor = 1e-8;
  double violation_threshold = 1e-12;
  std::uint64_t seed = 0;

  std::vector<double> xi_grid() const;
  core::json budget() const;
};

struct EstimateResult {
  std::optional<SteepnessProfile> profile;
  std::optional<SteepnessViolation> violation;
  std::vector<WorstCase> worst;
  std::vector<Vec> excluded_points;
  std::vector<std::string> warnings;
  std::size_t points_used = 0;

  core::json to_json() const;
};

/// Samples points of the domain shrunk by ξ_max and frames Γ ⊥ ω(I) for each
/// multiplicity m < n; at the (I, Γ) with the smallest margin at the smallest
/// ξ fits log margin against log ξ. A margin below the violation threshold at
/// ξ_max yields a violation report instead of a profile.
EstimateResult estimate_indices(const FrequencyMap& map, const EstimateOptions& opt = EstimateOptions{});

struct VerifyReport {
  bool pass = false;
  double min_ratio = 0.0;
  double min_frequency = 0.0;
  std::size_t checks = 0;
  std::optional<SteepnessViolation> worst;

  core::json to_json() const;
};

/// Checks inf |ω| > 0 and margin > C_m ξ^{α_m} on sampled (I, Γ, ξ) with
/// ξ ∈ (0, δ]; reports min margin/(C_m ξ^{α_m}).
VerifyReport verify_steepness(const FrequencyMap& map, const SteepnessProfile& profile,
                              const EstimateOptions& budget = EstimateOptions{});

/// Seeded orthonormal frame of dimension m inside the orthogonal complement of w.
SubspaceFrame random_frame(const Vec& w, std::size_t m, std::uint64_t seed);

/// Named benchmarks: "convex3" (|I|²/2), "superconductivity" ((I₁²−I₂²)/2),
/// "quartic-steep" (I₁²/2 + I₂⁴/4 + I₃²/2).
FrequencyMap benchmark(const std::string& name);
core::Polynomial benchmark_hamiltonian(const std::string& name);
std::vector<std::string> benchmark_names();

}  // namespace neklab::steepness
