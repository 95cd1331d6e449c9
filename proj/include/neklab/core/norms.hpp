#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "neklab/core/grid_function.hpp"
#include "neklab/core/trig_poly.hpp"

namespace neklab::core {

struct NormReport {
  std::string kind;
  double value = 0.0;
  std::size_t resolution = 0;
  double error_estimate = 0.0;
};

/// Action sample used to approximate suprema over D_r: a uniform real grid
/// on B_∞(center, R) plus imaginary offsets when r > 0.
struct ActionProbes {
  std::vector<std::vector<cplx>> points;
  std::size_t real_nodes_per_axis = 0;
};

/// Real grid of `nodes_per_axis` points per axis; when r > 0 every real point
/// is also probed at I + iy with y ∈ {−r, 0, r}ⁿ (n ≤ 3) or y = ±r e_j.
ActionProbes action_probes(const DomainSpec& dom, std::size_t nodes_per_axis);

/// ‖g‖_{r,s} = sup_I Σ_k |ĝ_k(I)| e^{|k|₁ s}, with r taken from `dom`.
double weighted_fourier_norm(const TrigPoly& g, const DomainSpec& dom, double s,
                             std::size_t nodes_per_axis = 16);
double weighted_fourier_norm(const TrigPoly& g, const ActionProbes& probes, double s);

/// |g|_{r,s}: sup of |g| over the action probes and the angle strip
/// max_j |Im θ_j| ≤ s. Real parts of θ run over `angle_nodes` points per
/// axis; imaginary parts sit at the 2ⁿ corners ±s (maximum modulus).
double strip_sup_norm(const TrigPoly& g, const ActionProbes& probes, double s,
                      std::size_t angle_nodes = 64);

/// One finite-difference derivative along `axis`: central in the interior and
/// on periodic axes, second-order one-sided at interval ends.
GridFunction finite_difference(const GridFunction& f, std::size_t axis);

/// All partial derivatives ∂^α f with |α| = order (order 0 returns f).
std::vector<GridFunction> partial_derivatives(const GridFunction& f, int order);

/// ‖f‖_{C^q}: max over |α| ≤ q of sup |∂^α f| on the grid.
double cq_norm(const GridFunction& f, int q);

/// sup |g(x) − g(y)| / |x − y|^μ over node pairs with 0 < |x − y|_∞ < 1
/// (minimal image on periodic axes). Large grids fall back to every pair
/// within a local window plus a strided sample of longer offsets.
double holder_quotient(const GridFunction& g, double mu, std::size_t pair_budget = 4'000'000);

/// |f|_{C^ℓ}: ‖f‖_{C^⌊ℓ⌋} plus, for non-integer ℓ, the Hölder quotient of the
/// top-order derivatives. The error estimate compares against the grid with
/// every other node removed when that grid is admissible.
NormReport holder_norm_estimate(const GridFunction& f, double ell);

}  // namespace neklab::core
