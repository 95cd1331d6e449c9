#include "neklab/core/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neklab/core/fft.hpp"
#include "neklab/core/norms.hpp"
#include "neklab/errors.hpp"

namespace neklab::core {

namespace {

void check_angle_axis(const Axis& a) {
  if (!a.periodic) throw DomainError("fourier_coefficients: angle axis is not periodic");
  if (std::abs(a.length() - 2.0 * std::numbers::pi) > 1e-12)
    throw DomainError("fourier_coefficients: angle axis must have period 2π");
}

// Visits every k with |k_j| ≤ orders[j] in lexicographic order.
template <class F>
void for_each_box_index(const std::vector<int>& orders, F&& visit) {
  const std::size_t n = orders.size();
  std::vector<int> k(n);
  for (std::size_t j = 0; j < n; ++j) k[j] = -orders[j];
  while (true) {
    visit(k);
    std::size_t j = n;
    while (j-- > 0) {
      if (++k[j] <= orders[j]) break;
      k[j] = -orders[j];
      if (j == 0) return;
    }
    if (n == 0) return;
  }
}

std::size_t wrapped_offset(const std::vector<int>& k, const std::vector<int>& dims) {
  std::size_t off = 0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    const int m = ((k[j] % dims[j]) + dims[j]) % dims[j];
    off = off * static_cast<std::size_t>(dims[j]) + static_cast<std::size_t>(m);
  }
  return off;
}

}  // namespace

std::size_t CoefficientGrid::action_nodes() const noexcept {
  std::size_t m = 1;
  for (const auto& a : action_axes) m *= a.nodes;
  return m;
}

cplx CoefficientGrid::at(const MultiIndex& k, std::size_t a) const {
  auto it = values.find(k);
  return it == values.end() ? cplx{} : it->second.at(a);
}

double CoefficientGrid::sup_abs(const MultiIndex& k) const {
  auto it = values.find(k);
  if (it == values.end()) return 0.0;
  double m = 0.0;
  for (const cplx& c : it->second) m = std::max(m, std::abs(c));
  return m;
}

std::vector<double> CoefficientGrid::action_coords(std::size_t a) const {
  std::vector<double> x(action_axes.size());
  for (std::size_t d = action_axes.size(); d-- > 0;) {
    x[d] = action_axes[d].coord(a % action_axes[d].nodes);
    a /= action_axes[d].nodes;
  }
  return x;
}

TrigPoly CoefficientGrid::to_trig_poly(double drop_below) const {
  if (!action_axes.empty())
    throw DomainError("CoefficientGrid::to_trig_poly: table depends on the actions");
  TrigPoly t(angle_dim);
  for (const auto& [k, v] : values)
    if (std::abs(v[0]) > drop_below) t.add(k, Polynomial::constant(angle_dim, v[0]));
  return t;
}

CoefficientGrid fourier_coefficients(const GridFunction& f, std::size_t angle_dim, int max_order,
                                     double drop_below) {
  return fourier_coefficients(f, angle_dim, std::vector<int>(angle_dim, max_order), drop_below);
}

CoefficientGrid fourier_coefficients(const GridFunction& f, std::size_t angle_dim,
                                     const std::vector<int>& max_orders, double drop_below) {
  if (angle_dim == 0 || angle_dim > f.dims())
    throw DomainError("fourier_coefficients: angle dimension out of range");
  if (max_orders.size() != angle_dim)
    throw DomainError("fourier_coefficients: one order per angle axis required");
  const std::size_t first = f.dims() - angle_dim;
  std::vector<int> dims(angle_dim);
  std::size_t block = 1;
  for (std::size_t j = 0; j < angle_dim; ++j) {
    const Axis& a = f.axis(first + j);
    check_angle_axis(a);
    if (max_orders[j] < 0) throw DomainError("fourier_coefficients: negative order");
    if (a.nodes < 2 * static_cast<std::size_t>(max_orders[j]) + 2)
      throw ResolutionError("fourier_coefficients: angle axis needs at least 2*max_order+2 nodes");
    dims[j] = static_cast<int>(a.nodes);
    block *= a.nodes;
  }

  CoefficientGrid out;
  out.action_axes.assign(f.axes().begin(), f.axes().begin() + static_cast<long>(first));
  out.angle_dim = angle_dim;
  const std::size_t nact = out.action_nodes();

  std::vector<MultiIndex> ks;
  std::vector<std::size_t> offsets;
  std::vector<cplx> phase;
  for_each_box_index(max_orders, [&](const std::vector<int>& k) {
    ks.emplace_back(k);
    offsets.push_back(wrapped_offset(k, dims));
    double ph = 0.0;
    for (std::size_t j = 0; j < angle_dim; ++j) ph -= k[j] * f.axis(first + j).lo;
    phase.push_back(std::polar(1.0 / static_cast<double>(block), ph));
  });
  std::vector<std::vector<cplx>> table(ks.size(), std::vector<cplx>(nact));

  const FftPlan plan(dims, FftPlan::Direction::forward);
  cplx* buf = plan.buffer();
  const auto& v = f.values();
  for (std::size_t a = 0; a < nact; ++a) {
    for (std::size_t i = 0; i < block; ++i) buf[i] = cplx(v[a * block + i], 0.0);
    plan.execute_buffer();
    for (std::size_t t = 0; t < ks.size(); ++t) table[t][a] = buf[offsets[t]] * phase[t];
  }
  for (std::size_t t = 0; t < ks.size(); ++t) {
    double m = 0.0;
    for (const cplx& c : table[t]) m = std::max(m, std::abs(c));
    if (m > drop_below || (drop_below == 0.0 && m > 0.0)) out.values.emplace(ks[t], std::move(table[t]));
  }
  return out;
}

GridFunction synthesize(const CoefficientGrid& c, const std::vector<Axis>& angle_axes) {
  if (angle_axes.size() != c.angle_dim) throw DomainError("synthesize: angle dimension mismatch");
  std::vector<int> dims(c.angle_dim);
  std::size_t block = 1;
  for (std::size_t j = 0; j < c.angle_dim; ++j) {
    check_angle_axis(angle_axes[j]);
    dims[j] = static_cast<int>(angle_axes[j].nodes);
    block *= angle_axes[j].nodes;
  }
  for (const auto& [k, v] : c.values)
    for (std::size_t j = 0; j < c.angle_dim; ++j)
      if (2 * std::abs(k[j]) + 1 > dims[j])
        throw ResolutionError("synthesize: harmonic exceeds the angle grid");

  std::vector<Axis> axes = c.action_axes;
  axes.insert(axes.end(), angle_axes.begin(), angle_axes.end());
  GridFunction g(axes);
  const std::size_t nact = c.action_nodes();

  std::vector<std::size_t> offsets;
  std::vector<cplx> phase;
  for (const auto& [k, v] : c.values) {
    offsets.push_back(wrapped_offset(k.entries(), dims));
    double ph = 0.0;
    for (std::size_t j = 0; j < c.angle_dim; ++j) ph += k[j] * angle_axes[j].lo;
    phase.push_back(std::polar(1.0, ph));
  }

  const FftPlan plan(dims, FftPlan::Direction::backward);
  cplx* buf = plan.buffer();
  for (std::size_t a = 0; a < nact; ++a) {
    std::fill(buf, buf + block, cplx{});
    std::size_t t = 0;
    for (const auto& [k, v] : c.values) {
      buf[offsets[t]] += v[a] * phase[t];
      ++t;
    }
    plan.execute_buffer();
    for (std::size_t i = 0; i < block; ++i) g[a * block + i] = buf[i].real();
  }
  return g;
}

namespace {

double top_derivative_sup(const GridFunction& f, int q) {
  double m = 0.0;
  for (const auto& d : partial_derivatives(f, q)) m = std::max(m, d.sup_abs());
  return m;
}

// Sustained growth of the q-th difference quotients under refinement means
// the derivative is unbounded. Band-limited functions may also grow between
// coarse levels, but that growth decays as the grid resolves them.
bool looks_unbounded(const GridFunction& f, int q) {
  try {
    const GridFunction c1 = f.coarsened();
    const GridFunction c2 = c1.coarsened();
    const double d0 = top_derivative_sup(f, q);
    const double d1 = top_derivative_sup(c1, q);
    const double d2 = top_derivative_sup(c2, q);
    const double tiny = 1e-12 * std::max(1.0, f.sup_abs());
    if (d1 <= tiny || d2 <= tiny) return false;
    const double r0 = d0 / d1;
    const double r1 = d1 / d2;
    return r0 > 1.2 && r0 >= 0.8 * r1;
  } catch (const ResolutionError&) {
    return false;
  }
}

}  // namespace

DecayReport fourier_decay_check(const GridFunction& f, std::size_t angle_dim, double ell,
                                int max_order) {
  if (!(ell >= 1.0)) throw DomainError("fourier_decay_check: ell must be at least 1");
  const int q = static_cast<int>(std::floor(ell));
  if (looks_unbounded(f, q))
    throw DomainError("fourier_decay_check: derivatives of order floor(ell) are not bounded");
  const CoefficientGrid c = fourier_coefficients(f, angle_dim, max_order);
  DecayReport r;
  r.order = q;
  r.c_norm = cq_norm(f, q);
  if (!(r.c_norm > 0.0)) throw DomainError("fourier_decay_check: zero function");
  for (const auto& [k, v] : c.values) {
    if (k.is_zero()) continue;
    DecayEntry e;
    e.k = k;
    e.magnitude = c.sup_abs(k);
    e.ratio_linf = e.magnitude * std::pow(static_cast<double>(k.linf()), q) / r.c_norm;
    e.ratio_l1 = e.magnitude * std::pow(static_cast<double>(k.l1()), q) / r.c_norm;
    r.max_ratio_linf = std::max(r.max_ratio_linf, e.ratio_linf);
    r.max_ratio_l1 = std::max(r.max_ratio_l1, e.ratio_l1);
    r.entries.push_back(std::move(e));
  }
  return r;
}

}  // namespace neklab::core
