#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "neklab/core/multi_index.hpp"
#include "neklab/core/polynomial.hpp"

namespace neklab::core {

/// Finite Fourier sum Σ_k ĝ_k(I) e^{ik·θ} with polynomial coefficients in the
/// actions. n actions and n angles share the same dimension.
///
/// Harmonics whose coefficient polynomial is zero are never stored. The
/// reality condition ĝ_{-k} = conj(ĝ_k) is not enforced on every mutation
/// (intermediate sums may break it); `is_real` checks it and `realified`
/// restores it.
class TrigPoly {
 public:
  using Table = std::map<MultiIndex, Polynomial>;

  explicit TrigPoly(std::size_t n = 0) : n_(n) {}

  /// A polynomial in I only (harmonic k = 0).
  static TrigPoly from_polynomial(const Polynomial& p);
  /// c·cos(k·θ) with constant amplitude.
  static TrigPoly cosine(const MultiIndex& k, double c = 1.0);
  /// c·sin(k·θ) with constant amplitude.
  static TrigPoly sine(const MultiIndex& k, double c = 1.0);
  /// The single harmonic p(I)·e^{ik·θ}; not real on its own.
  static TrigPoly harmonic(const MultiIndex& k, const Polynomial& p);

  std::size_t dim() const noexcept { return n_; }
  const Table& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// max |k|_∞ over stored harmonics (0 for the zero function).
  long max_order() const noexcept;
  long max_l1_order() const noexcept;
  /// Largest total degree of the coefficient polynomials.
  int max_degree() const noexcept;
  /// True when every coefficient is constant in the actions.
  bool is_angle_only() const noexcept;

  const Polynomial* coefficient(const MultiIndex& k) const;
  void add(const MultiIndex& k, const Polynomial& p);

  /// Σ_k ĝ_k(I) e^{ik·θ} at complex arguments.
  cplx evaluate_complex(std::span<const cplx> I, std::span<const cplx> theta) const;
  /// Real part of the series at real (I, θ).
  double evaluate(std::span<const double> I, std::span<const double> theta) const;
  cplx evaluate_raw(std::span<const double> I, std::span<const double> theta) const;

  TrigPoly d_action(std::size_t j) const;
  TrigPoly d_angle(std::size_t j) const;

  /// Checks ĝ_{-k} = conj(ĝ_k) coefficient-wise within `tol`.
  bool is_real(double tol = 1e-12) const;
  /// Symmetrized (g + conj-reflected g)/2, exactly real.
  TrigPoly realified() const;
  TrigPoly pruned(double tol) const;
  /// Keeps harmonics for which `keep(k)` is true.
  TrigPoly filtered(const std::function<bool(const MultiIndex&)>& keep) const;
  /// Sum of coefficient magnitudes over all harmonics and monomials.
  double coefficient_l1() const noexcept;

  TrigPoly& operator+=(const TrigPoly& o);
  TrigPoly& operator-=(const TrigPoly& o);
  TrigPoly operator+(const TrigPoly& o) const;
  TrigPoly operator-(const TrigPoly& o) const;
  TrigPoly operator*(const TrigPoly& o) const;
  TrigPoly operator*(cplx c) const;
  TrigPoly operator-() const;
  bool operator==(const TrigPoly& o) const = default;

 private:
  void check_same(const TrigPoly& o) const;

  std::size_t n_;
  Table terms_;
};

/// {F, G} = Σ_j ∂_{I_j}F ∂_{θ_j}G − ∂_{θ_j}F ∂_{I_j}G, so that
/// {h, e^{ik·θ}} = i(k·ω) e^{ik·θ}.
TrigPoly poisson_bracket(const TrigPoly& F, const TrigPoly& G);

}  // namespace neklab::core
