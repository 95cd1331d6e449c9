#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "neklab/core/fit.hpp"
#include "neklab/core/fourier.hpp"
#include "neklab/core/grid_function.hpp"
#include "neklab/core/io.hpp"
#include "neklab/core/trig_poly.hpp"

namespace neklab::smoothing {

using core::cplx;

/// Radial smooth bump: 1 for |x|₂ ≤ plateau, 0 for |x|₂ ≥ support, and the
/// exp(−1/t) smooth step in between.
struct BumpSpec {
  std::size_t dim = 1;
  double plateau = 0.5;
  double support = 1.0;
  std::string profile = "exp-step";

  void validate() const;
  /// Default Φ: plateau 1/2, support 1.
  static BumpSpec action(std::size_t dim);
  /// Default Ψ: support 1/√n so that Ψ(sk) ≠ 0 forces |k|₁ < 1/s.
  static BumpSpec angle(std::size_t dim);
};

double bump(std::span<const double> x, const BumpSpec& spec);
double bump_radial(double r, const BumpSpec& spec);

/// K(y) = (2π)^{-n} ∫ Φ(η) e^{−iη·y} dη by the trapezoid rule with
/// `quadrature_nodes` points per axis; the result is compared with the rule at
/// double resolution and a ResolutionError is raised when they differ by more
/// than `tolerance` (relative to K(0)).
cplx kernel(std::span<const cplx> y, const BumpSpec& spec, std::size_t quadrature_nodes = 512,
            double tolerance = 1e-8);

struct KernelTable {
  BumpSpec spec;
  std::vector<double> radii;
  std::vector<cplx> values;
  std::size_t quadrature_nodes = 0;
};

/// K along the first coordinate axis at the given radii.
KernelTable tabulate_kernel(const BumpSpec& spec, const std::vector<double>& radii,
                            std::size_t quadrature_nodes);

/// Spectral form of the convolution f_s = s^{-n} K(·/s) * f on a
/// non-periodic grid: zero-padded FFT, multiplier Φ(sη), inverse FFT.
class SpectralSmoother {
 public:
  SpectralSmoother(const std::vector<core::Axis>& axes, double s, const BumpSpec& phi);

  /// f_s at the grid nodes shifted by i·imag_offset (empty means real nodes).
  std::vector<cplx> apply(const std::vector<cplx>& data, std::span<const double> imag_offset = {}) const;

  const std::vector<std::size_t>& padded() const noexcept { return padded_; }

 private:
  std::vector<core::Axis> axes_;
  std::vector<std::size_t> padded_;
  std::vector<double> multiplier_;
  std::vector<std::vector<double>> eta_;
  std::size_t total_ = 0;
};

struct StripProbe {
  std::size_t axis = 0;
  double offset = 0.0;
  double sup_abs = 0.0;
};

struct NonperiodicResult {
  core::GridFunction values;
  std::vector<StripProbe> probes;
  double strip_sup = 0.0;
};

/// Smooths a compactly supported grid function on ℝⁿ at width s ∈ (0,1]
/// and probes the strip at imaginary offsets {0, s/2, s} along each axis.
NonperiodicResult smooth_nonperiodic(const core::GridFunction& f, double s,
                                     const BumpSpec& phi = BumpSpec{});

struct JacksonOptions {
  BumpSpec psi;
  BumpSpec phi;
  int fit_degree = 6;
  /// Polynomial fits use action nodes in B_∞(center, fit_radius); ≤ 0 means
  /// the whole action grid.
  double fit_radius = 0.0;
  std::vector<double> fit_center;
};

struct JacksonResult {
  core::TrigPoly fs;
  double fit_residual = 0.0;
  std::size_t harmonics_in = 0;
};

/// Jackson polynomial: coefficient k becomes Ψ(sk)·(f̂_k)_s, and every
/// harmonic with |k|₁ > 1/s is dropped. Action-dependent coefficients are
/// smoothed spectrally and fitted by polynomials of degree `fit_degree`.
JacksonResult jackson_smooth(const core::CoefficientGrid& f_hat, double s, const JacksonOptions& opt);

/// Angle-only convenience overload.
core::TrigPoly jackson_smooth(const core::CoefficientGrid& f_hat, double s, const BumpSpec& psi);

struct SmoothingReport {
  double s = 0.0;
  std::vector<double> errors;
  double fourier_norm = 0.0;
  double fit_residual = 0.0;
  double slope_p0 = 0.0;
  double slope_p1 = 0.0;
  double C_A_hat = 0.0;
  double C_B_hat = 0.0;

  core::json to_json() const;
};

struct AnnulusOptions {
  int max_order = -1;
  std::vector<int> max_orders;
  int fit_degree = 6;
  std::size_t norm_probe_nodes = 5;
  /// dim == 0 selects BumpSpec::angle(n) and BumpSpec::action(n).
  BumpSpec psi{0};
  BumpSpec phi{0};
};

struct AnnulusResult {
  core::TrigPoly fs;
  SmoothingReport report;
};

/// Smoothing on B_∞(c, 2R) × 𝕋ⁿ: the action axes of `f` must be the
/// interval [c−2R, c+2R] (R is read off the grid) followed by n angle axes.
AnnulusResult smooth_annulus(const core::GridFunction& f, double s, double ell,
                             const AnnulusOptions& opt = AnnulusOptions{});

/// The smooth cutoff χ of the annulus construction: 1 on B_∞(c, R), 0
/// outside B_∞(c, 2R).
double annulus_cutoff(std::span<const double> I, std::span<const double> center, double R);

/// Discrete ‖f − f_s‖_{C^p} on B_∞(c, R/2) × 𝕋ⁿ for p ≤ ⌊ℓ⌋.
double smoothing_error(const core::GridFunction& f, const core::TrigPoly& fs, int p, double declared_ell);

/// Evaluates a TrigPoly on the nodes of an action-angle grid.
core::GridFunction evaluate_on_grid(const core::TrigPoly& g, const std::vector<core::Axis>& action_axes,
                                    const std::vector<core::Axis>& angle_axes);

struct SweepResult {
  std::vector<SmoothingReport> reports;
  double slope_p0 = 0.0;
  double slope_p1 = 0.0;
  double holder_norm = 0.0;
  double C_A_hat = 0.0;
  double C_B_hat = 0.0;
  double fourier_norm_spread = 0.0;
};

/// Runs smooth_annulus over the widths and fits log error against log s.
SweepResult smoothing_sweep(const core::GridFunction& f, const std::vector<double>& widths, double ell,
                            const AnnulusOptions& opt = AnnulusOptions{});

/// Test family a(I)·Σ_{k≤k_max} k^{−(ℓ+1)} cos(kθ₁) (+ cos θ_j for j ≥ 2)
/// with a(I) = 1 + |I|²/4, sampled on [−2R, 2R]ⁿ × 𝕋ⁿ.
core::GridFunction holder_test_family(std::size_t n, double ell, int k_max, double R,
                                      std::size_t action_nodes, const std::vector<std::size_t>& angle_nodes);


}  // namespace neklab::smoothing
