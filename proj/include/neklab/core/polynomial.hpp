#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace neklab::core {

using cplx = std::complex<double>;

/// Multivariate polynomial in the actions I with complex coefficients.
///
/// Terms are keyed by their exponent vector; a term whose coefficient is
/// exactly zero is never stored.
class Polynomial {
 public:
  using Exponents = std::vector<int>;

  explicit Polynomial(std::size_t nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, cplx c);
  /// The coordinate function I_j.
  static Polynomial variable(std::size_t nvars, std::size_t j);
  /// (I_j - center) / scale, used for well-conditioned fitting bases.
  static Polynomial affine(std::size_t nvars, std::size_t j, double center, double scale);

  std::size_t nvars() const noexcept { return nvars_; }
  const std::map<Exponents, cplx>& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// True when only the constant monomial is present (or the polynomial is zero).
  bool is_constant() const noexcept;
  int degree() const noexcept;
  cplx constant_term() const;
  cplx coefficient(const Exponents& e) const;

  /// Adds c·I^e, dropping the term when the result is exactly zero.
  void add_term(const Exponents& e, cplx c);

  cplx evaluate(std::span<const double> I) const;
  cplx evaluate(std::span<const cplx> I) const;

  Polynomial derivative(std::size_t j) const;
  Polynomial conj() const;
  /// Removes terms with |coefficient| ≤ tol.
  Polynomial pruned(double tol) const;

  /// Sum of coefficient magnitudes.
  double coefficient_l1() const noexcept;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(cplx c);
  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(cplx c) const;
  Polynomial operator-() const;
  bool operator==(const Polynomial& o) const = default;

  Polynomial pow(int e) const;

 private:
  void check_same(const Polynomial& o) const;

  std::size_t nvars_;
  std::map<Exponents, cplx> terms_;
};

inline Polynomial operator*(cplx c, const Polynomial& p) { return p * c; }

/// Exact division attempt: returns true and the quotient when `num` is an
/// exact polynomial multiple of `den` (remainder coefficients below `tol`
/// times the numerator's coefficient sum count as zero).
bool divide_exact(const Polynomial& num, const Polynomial& den, Polynomial& quotient,
                  double tol = 1e-13);

}  // namespace neklab::core
