#include "neklab/core/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "neklab/errors.hpp"

namespace neklab::core {

Polynomial Polynomial::constant(std::size_t nvars, cplx c) {
  Polynomial p(nvars);
  p.add_term(Exponents(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t j) {
  if (j >= nvars) throw DomainError("Polynomial::variable: index out of range");
  Polynomial p(nvars);
  Exponents e(nvars, 0);
  e[j] = 1;
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::affine(std::size_t nvars, std::size_t j, double center, double scale) {
  if (scale == 0.0) throw DomainError("Polynomial::affine: zero scale");
  return (variable(nvars, j) - constant(nvars, center)) * cplx(1.0 / scale);
}

bool Polynomial::is_constant() const noexcept {
  for (const auto& [e, c] : terms_)
    for (int v : e)
      if (v != 0) return false;
  return true;
}

int Polynomial::degree() const noexcept {
  int d = -1;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int v : e) s += v;
    d = std::max(d, s);
  }
  return d;
}

cplx Polynomial::constant_term() const { return coefficient(Exponents(nvars_, 0)); }

cplx Polynomial::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? cplx{} : it->second;
}

void Polynomial::add_term(const Exponents& e, cplx c) {
  if (e.size() != nvars_) throw DomainError("Polynomial::add_term: exponent length mismatch");
  if (c == cplx{}) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

namespace {

template <class T>
cplx eval_impl(const std::map<Polynomial::Exponents, cplx>& terms, std::span<const T> I,
               std::size_t nvars) {
  if (I.size() != nvars) throw DomainError("Polynomial::evaluate: dimension mismatch");
  cplx s{};
  for (const auto& [e, c] : terms) {
    cplx m = c;
    for (std::size_t j = 0; j < nvars; ++j)
      for (int p = 0; p < e[j]; ++p) m *= I[j];
    s += m;
  }
  return s;
}

}  // namespace

cplx Polynomial::evaluate(std::span<const double> I) const { return eval_impl(terms_, I, nvars_); }
cplx Polynomial::evaluate(std::span<const cplx> I) const { return eval_impl(terms_, I, nvars_); }

Polynomial Polynomial::derivative(std::size_t j) const {
  if (j >= nvars_) throw DomainError("Polynomial::derivative: index out of range");
  Polynomial d(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[j] == 0) continue;
    Exponents f = e;
    f[j] -= 1;
    d.add_term(f, c * static_cast<double>(e[j]));
  }
  return d;
}

Polynomial Polynomial::conj() const {
  Polynomial p(nvars_);
  for (const auto& [e, c] : terms_) p.terms_.emplace(e, std::conj(c));
  return p;
}

Polynomial Polynomial::pruned(double tol) const {
  Polynomial p(nvars_);
  for (const auto& [e, c] : terms_)
    if (std::abs(c) > tol) p.terms_.emplace(e, c);
  return p;
}

double Polynomial::coefficient_l1() const noexcept {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += std::abs(c);
  return s;
}

void Polynomial::check_same(const Polynomial& o) const {
  if (o.nvars_ != nvars_) throw DomainError("Polynomial: variable count mismatch");
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  check_same(o);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  check_same(o);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(cplx c) {
  if (c == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, v] : terms_) v *= c;
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r(*this);
  r += o;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial r(*this);
  r -= o;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  check_same(o);
  Polynomial r(nvars_);
  Exponents e(nvars_);
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      for (std::size_t j = 0; j < nvars_; ++j) e[j] = ea[j] + eb[j];
      r.add_term(e, ca * cb);
    }
  return r;
}

Polynomial Polynomial::operator*(cplx c) const {
  Polynomial r(*this);
  r *= c;
  return r;
}

Polynomial Polynomial::operator-() const { return *this * cplx(-1.0); }

Polynomial Polynomial::pow(int e) const {
  if (e < 0) throw DomainError("Polynomial::pow: negative exponent");
  Polynomial r = constant(nvars_, 1.0);
  for (int i = 0; i < e; ++i) r = r * *this;
  return r;
}

bool divide_exact(const Polynomial& num, const Polynomial& den, Polynomial& quotient, double tol) {
  if (den.is_zero()) throw DomainError("divide_exact: zero divisor");
  if (num.nvars() != den.nvars()) throw DomainError("divide_exact: variable count mismatch");
  const std::size_t n = num.nvars();
  const double scale = num.coefficient_l1();
  const auto& [lead_e, lead_c] = *den.terms().rbegin();
  Polynomial rem = num;
  Polynomial q(n);
  // Lexicographic leading terms; exact multiples reduce to zero.
  for (int guard = 0; guard < 100000; ++guard) {
    rem = rem.pruned(tol * scale);
    if (rem.is_zero()) {
      quotient = q;
      return true;
    }
    const auto& [re, rc] = *rem.terms().rbegin();
    Polynomial::Exponents qe(n);
    for (std::size_t j = 0; j < n; ++j) {
      qe[j] = re[j] - lead_e[j];
      if (qe[j] < 0) return false;
    }
    Polynomial t(n);
    t.add_term(qe, rc / lead_c);
    q += t;
    rem -= t * den;
  }
  return false;
}

}  // namespace neklab::core
