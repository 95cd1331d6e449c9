#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "neklab/core/io.hpp"

namespace neklab::geography {

using IntVec = std::vector<long long>;
using IntMat = std::vector<IntVec>;

/// Row-style Hermite normal form of the row lattice: upper echelon, positive
/// pivots, entries above each pivot reduced into [0, pivot). Zero rows are
/// dropped, so the result is a basis.
IntMat hermite_normal_form(IntMat rows, std::size_t ncols);

/// Basis of {x ∈ ℤⁿ : A x = 0} (saturated by construction).
IntMat integer_kernel(const IntMat& A, std::size_t ncols);

/// Saturated integer lattice of rank j in ℤⁿ, stored in canonical HNF.
class Lattice {
 public:
  Lattice() = default;
  /// The rank-0 lattice {0}.
  static Lattice trivial(std::size_t n);
  /// span_ℝ(generators) ∩ ℤⁿ.
  static Lattice saturate(std::size_t n, const IntMat& generators, double K = 0.0);

  std::size_t dim() const noexcept { return n_; }
  std::size_t rank() const noexcept { return basis_.size(); }
  const IntMat& basis() const noexcept { return basis_; }
  /// Rows spanning the orthogonal complement; k ∈ Λ iff every row is ⊥ k.
  const IntMat& annihilator() const noexcept { return annihilator_; }
  double covolume() const noexcept { return covolume_; }
  double K() const noexcept { return K_; }
  bool contains(const IntVec& k) const;
  /// Every k ∈ Λ with 0 < |k|₁ ≤ floor(K), one of each ±k pair.
  std::vector<IntVec> short_vectors(double K) const;

  bool operator==(const Lattice& o) const { return n_ == o.n_ && basis_ == o.basis_; }
  /// Canonical order: rank, then the HNF rows lexicographically.
  bool operator<(const Lattice& o) const;

  core::json to_json() const;

 private:
  std::size_t n_ = 0;
  IntMat basis_;
  IntMat annihilator_;
  double covolume_ = 1.0;
  double K_ = 0.0;
};

/// Nonzero k with |k|₁ ≤ floor(K), one representative of each ±k pair (first
/// nonzero entry positive), in lexicographic order.
std::vector<IntVec> short_integer_vectors(std::size_t n, double K);

/// Every saturated lattice of rank j spanned by vectors of ℤⁿ_K, in canonical
/// order. Raises BudgetError when the number of candidate extensions
/// exceeds `budget`.
std::vector<Lattice> enumerate_lattices(std::size_t n, double K, std::size_t j,
                                        std::size_t budget = 20'000'000);

core::json lattices_to_json(const std::vector<Lattice>& ls);

}  // namespace neklab::geography
