#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "neklab/core/grid_function.hpp"
#include "neklab/core/multi_index.hpp"
#include "neklab/core/polynomial.hpp"
#include "neklab/core/trig_poly.hpp"

namespace neklab::core {

/// Fourier coefficients ĝ_k sampled at every node of an action grid.
///
/// The grid function it came from had `action_axes` followed by
/// `angle_dim` periodic axes; `values[k][a]` is ĝ_k at action node a
/// (row-major over the action axes, a single node when there are none).
struct CoefficientGrid {
  std::vector<Axis> action_axes;
  std::size_t angle_dim = 0;
  std::map<MultiIndex, std::vector<cplx>> values;

  std::size_t action_nodes() const noexcept;
  /// ĝ_k at action node a, zero for harmonics not in the table.
  cplx at(const MultiIndex& k, std::size_t a = 0) const;
  /// max_a |ĝ_k(a)|.
  double sup_abs(const MultiIndex& k) const;
  /// Coordinates of action node a.
  std::vector<double> action_coords(std::size_t a) const;

  /// Angle-only tables become a TrigPoly with constant coefficients.
  TrigPoly to_trig_poly(double drop_below = 0.0) const;
};

/// Discrete Fourier coefficients over the trailing `angle_dim` axes of `f`,
/// for all |k|_∞ ≤ max_order. Each angle axis must span exactly one period
/// of length 2π and carry at least 2·max_order+2 nodes.
CoefficientGrid fourier_coefficients(const GridFunction& f, std::size_t angle_dim, int max_order,
                                     double drop_below = 0.0);

/// Per-axis orders: |k_j| ≤ max_orders[j].
CoefficientGrid fourier_coefficients(const GridFunction& f, std::size_t angle_dim,
                                     const std::vector<int>& max_orders, double drop_below = 0.0);

/// Sums the table back onto a grid with the given action axes and angle
/// axes (the action axes must match the table's).
GridFunction synthesize(const CoefficientGrid& c, const std::vector<Axis>& angle_axes);

struct DecayEntry {
  MultiIndex k;
  double magnitude = 0.0;
  double ratio_linf = 0.0;
  double ratio_l1 = 0.0;
};

struct DecayReport {
  int order = 0;
  double c_norm = 0.0;
  double max_ratio_linf = 0.0;
  double max_ratio_l1 = 0.0;
  std::vector<DecayEntry> entries;
};

/// Empirical constant of |f̂_k|·|k|^q ≤ C‖f‖_{C^q}, q = ⌊ℓ⌋, reported against
/// both |k|_∞ and |k|₁. Functions whose q-th finite differences keep growing
/// under grid refinement are rejected as not C^q (DomainError).
DecayReport fourier_decay_check(const GridFunction& f, std::size_t angle_dim, double ell,
                                int max_order);

}  // namespace neklab::core
