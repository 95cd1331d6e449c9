#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace neklab::core {

/// Integer vector k ∈ ℤⁿ labelling a Fourier harmonic e^{ik·θ}.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n) : k_(n, 0) {}
  MultiIndex(std::initializer_list<int> k) : k_(k) {}
  explicit MultiIndex(std::vector<int> k) : k_(std::move(k)) {}

  std::size_t size() const noexcept { return k_.size(); }
  int operator[](std::size_t i) const { return k_[i]; }
  int& operator[](std::size_t i) { return k_[i]; }
  const std::vector<int>& entries() const noexcept { return k_; }

  long l1() const noexcept;
  double l2() const noexcept;
  long linf() const noexcept;
  bool is_zero() const noexcept;

  /// k·x for a real vector of matching length.
  double dot(std::span<const double> x) const;

  MultiIndex operator-() const;
  MultiIndex operator+(const MultiIndex& o) const;
  MultiIndex operator-(const MultiIndex& o) const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

  std::string str() const;

 private:
  std::vector<int> k_;
};

/// All k ∈ ℤⁿ with |k|_∞ ≤ order, in lexicographic order.
std::vector<MultiIndex> box_indices(std::size_t n, int order);

/// All k ∈ ℤⁿ with |k|₁ ≤ order, in lexicographic order.
std::vector<MultiIndex> l1_ball_indices(std::size_t n, int order);

}  // namespace neklab::core
