#include "neklab/core/multi_index.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "neklab/errors.hpp"

namespace neklab::core {

long MultiIndex::l1() const noexcept {
  long s = 0;
  for (int v : k_) s += std::labs(v);
  return s;
}

double MultiIndex::l2() const noexcept {
  double s = 0.0;
  for (int v : k_) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

long MultiIndex::linf() const noexcept {
  long m = 0;
  for (int v : k_) m = std::max<long>(m, std::labs(v));
  return m;
}

bool MultiIndex::is_zero() const noexcept {
  for (int v : k_)
    if (v != 0) return false;
  return true;
}

double MultiIndex::dot(std::span<const double> x) const {
  if (x.size() != k_.size()) throw DomainError("MultiIndex::dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < k_.size(); ++i) s += k_[i] * x[i];
  return s;
}

MultiIndex MultiIndex::operator-() const {
  MultiIndex r(*this);
  for (auto& v : r.k_) v = -v;
  return r;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  if (o.size() != size()) throw DomainError("MultiIndex: dimension mismatch");
  MultiIndex r(*this);
  for (std::size_t i = 0; i < size(); ++i) r.k_[i] += o.k_[i];
  return r;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const { return *this + (-o); }

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < k_.size(); ++i) os << (i ? "," : "") << k_[i];
  os << ')';
  return os.str();
}

namespace {

void box_rec(std::size_t n, int order, std::vector<int>& cur, std::vector<MultiIndex>& out,
             int l1_budget, bool use_l1) {
  if (cur.size() == n) {
    out.emplace_back(cur);
    return;
  }
  const int lim = use_l1 ? l1_budget : order;
  for (int v = -lim; v <= lim; ++v) {
    cur.push_back(v);
    box_rec(n, order, cur, out, l1_budget - std::abs(v), use_l1);
    cur.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> box_indices(std::size_t n, int order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  box_rec(n, order, cur, out, 0, false);
  return out;
}

std::vector<MultiIndex> l1_ball_indices(std::size_t n, int order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur;
  box_rec(n, order, cur, out, order, true);
  return out;
}

}  // namespace neklab::core
