#include "neklab/core/trig_poly.hpp"

#include <algorithm>
#include <cmath>

#include "neklab/errors.hpp"

namespace neklab::core {

namespace {
constexpr cplx kI{0.0, 1.0};
}

TrigPoly TrigPoly::from_polynomial(const Polynomial& p) {
  TrigPoly t(p.nvars());
  t.add(MultiIndex(p.nvars()), p);
  return t;
}

TrigPoly TrigPoly::cosine(const MultiIndex& k, double c) {
  const std::size_t n = k.size();
  TrigPoly t(n);
  if (k.is_zero()) {
    t.add(k, Polynomial::constant(n, c));
    return t;
  }
  t.add(k, Polynomial::constant(n, 0.5 * c));
  t.add(-k, Polynomial::constant(n, 0.5 * c));
  return t;
}

TrigPoly TrigPoly::sine(const MultiIndex& k, double c) {
  const std::size_t n = k.size();
  TrigPoly t(n);
  if (k.is_zero()) return t;
  t.add(k, Polynomial::constant(n, cplx(0.0, -0.5 * c)));
  t.add(-k, Polynomial::constant(n, cplx(0.0, 0.5 * c)));
  return t;
}

TrigPoly TrigPoly::harmonic(const MultiIndex& k, const Polynomial& p) {
  if (k.size() != p.nvars()) throw DomainError("TrigPoly::harmonic: dimension mismatch");
  TrigPoly t(k.size());
  t.add(k, p);
  return t;
}

long TrigPoly::max_order() const noexcept {
  long m = 0;
  for (const auto& [k, p] : terms_) m = std::max(m, k.linf());
  return m;
}

long TrigPoly::max_l1_order() const noexcept {
  long m = 0;
  for (const auto& [k, p] : terms_) m = std::max(m, k.l1());
  return m;
}

int TrigPoly::max_degree() const noexcept {
  int d = -1;
  for (const auto& [k, p] : terms_) d = std::max(d, p.degree());
  return d;
}

bool TrigPoly::is_angle_only() const noexcept {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const auto& kv) { return kv.second.is_constant(); });
}

const Polynomial* TrigPoly::coefficient(const MultiIndex& k) const {
  auto it = terms_.find(k);
  return it == terms_.end() ? nullptr : &it->second;
}

void TrigPoly::add(const MultiIndex& k, const Polynomial& p) {
  if (k.size() != n_ || p.nvars() != n_) throw DomainError("TrigPoly::add: dimension mismatch");
  if (p.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(k, p);
  if (!inserted) {
    it->second += p;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

cplx TrigPoly::evaluate_complex(std::span<const cplx> I, std::span<const cplx> theta) const {
  if (I.size() != n_ || theta.size() != n_)
    throw DomainError("TrigPoly::evaluate: dimension mismatch");
  cplx s{};
  for (const auto& [k, p] : terms_) {
    cplx phase{};
    for (std::size_t j = 0; j < n_; ++j) phase += static_cast<double>(k[j]) * theta[j];
    s += p.evaluate(I) * std::exp(kI * phase);
  }
  return s;
}

cplx TrigPoly::evaluate_raw(std::span<const double> I, std::span<const double> theta) const {
  if (I.size() != n_ || theta.size() != n_)
    throw DomainError("TrigPoly::evaluate: dimension mismatch");
  cplx s{};
  for (const auto& [k, p] : terms_) {
    const double phase = k.dot(theta);
    s += p.evaluate(I) * cplx(std::cos(phase), std::sin(phase));
  }
  return s;
}

double TrigPoly::evaluate(std::span<const double> I, std::span<const double> theta) const {
  return evaluate_raw(I, theta).real();
}

TrigPoly TrigPoly::d_action(std::size_t j) const {
  if (j >= n_) throw DomainError("TrigPoly::d_action: index out of range");
  TrigPoly r(n_);
  for (const auto& [k, p] : terms_) r.add(k, p.derivative(j));
  return r;
}

TrigPoly TrigPoly::d_angle(std::size_t j) const {
  if (j >= n_) throw DomainError("TrigPoly::d_angle: index out of range");
  TrigPoly r(n_);
  for (const auto& [k, p] : terms_) {
    if (k[j] == 0) continue;
    r.add(k, p * (kI * static_cast<double>(k[j])));
  }
  return r;
}

bool TrigPoly::is_real(double tol) const {
  for (const auto& [k, p] : terms_) {
    const Polynomial* q = coefficient(-k);
    const Polynomial diff = q ? (*q - p.conj()) : -p.conj();
    const double scale = std::max(1.0, p.coefficient_l1());
    for (const auto& [e, c] : diff.terms())
      if (std::abs(c) > tol * scale) return false;
  }
  return true;
}

TrigPoly TrigPoly::realified() const {
  TrigPoly r(n_);
  for (const auto& [k, p] : terms_) {
    r.add(k, p * cplx(0.5));
    r.add(-k, p.conj() * cplx(0.5));
  }
  return r;
}

TrigPoly TrigPoly::pruned(double tol) const {
  TrigPoly r(n_);
  for (const auto& [k, p] : terms_) r.add(k, p.pruned(tol));
  return r;
}

TrigPoly TrigPoly::filtered(const std::function<bool(const MultiIndex&)>& keep) const {
  TrigPoly r(n_);
  for (const auto& [k, p] : terms_)
    if (keep(k)) r.terms_.emplace(k, p);
  return r;
}

double TrigPoly::coefficient_l1() const noexcept {
  double s = 0.0;
  for (const auto& [k, p] : terms_) s += p.coefficient_l1();
  return s;
}

void TrigPoly::check_same(const TrigPoly& o) const {
  if (o.n_ != n_) throw DomainError("TrigPoly: dimension mismatch");
}

TrigPoly& TrigPoly::operator+=(const TrigPoly& o) {
  check_same(o);
  for (const auto& [k, p] : o.terms_) add(k, p);
  return *this;
}

TrigPoly& TrigPoly::operator-=(const TrigPoly& o) {
  check_same(o);
  for (const auto& [k, p] : o.terms_) add(k, -p);
  return *this;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
  TrigPoly r(*this);
  r += o;
  return r;
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const {
  TrigPoly r(*this);
  r -= o;
  return r;
}

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
  check_same(o);
  TrigPoly r(n_);
  for (const auto& [ka, pa] : terms_)
    for (const auto& [kb, pb] : o.terms_) r.add(ka + kb, pa * pb);
  return r;
}

TrigPoly TrigPoly::operator*(cplx c) const {
  TrigPoly r(n_);
  for (const auto& [k, p] : terms_) r.add(k, p * c);
  return r;
}

TrigPoly TrigPoly::operator-() const { return *this * cplx(-1.0); }

TrigPoly poisson_bracket(const TrigPoly& F, const TrigPoly& G) {
  if (F.dim() != G.dim()) throw DomainError("poisson_bracket: dimension mismatch");
  TrigPoly r(F.dim());
  for (std::size_t j = 0; j < F.dim(); ++j) {
    r += F.d_action(j) * G.d_angle(j);
    r -= F.d_angle(j) * G.d_action(j);
  }
  return r;
}

}  // namespace neklab::core
