#include "neklab/core/grid_function.hpp"

#include <cmath>
#include <numbers>

#include "neklab/errors.hpp"

namespace neklab::core {

double Axis::step() const noexcept {
  return periodic ? (hi - lo) / static_cast<double>(nodes)
                  : (hi - lo) / static_cast<double>(nodes - 1);
}

double Axis::coord(std::size_t i) const noexcept { return lo + step() * static_cast<double>(i); }

Axis Axis::angle(std::size_t nodes) { return Axis{0.0, 2.0 * std::numbers::pi, nodes, true}; }

Axis Axis::interval(double lo, double hi, std::size_t nodes) { return Axis{lo, hi, nodes, false}; }

GridFunction::GridFunction(std::vector<Axis> axes) : axes_(std::move(axes)) {
  init_strides();
  std::size_t total = axes_.empty() ? 0 : 1;
  for (const auto& a : axes_) total *= a.nodes;
  values_.assign(total, 0.0);
}

GridFunction::GridFunction(std::vector<Axis> axes, std::vector<double> values)
    : GridFunction(std::move(axes)) {
  if (values.size() != values_.size())
    throw DomainError("GridFunction: sample count does not match the grid");
  values_ = std::move(values);
}

void GridFunction::init_strides() {
  if (axes_.empty()) throw DomainError("GridFunction: at least one axis required");
  for (const auto& a : axes_) {
    if (a.nodes < 2) throw DomainError("GridFunction: each axis needs at least 2 nodes");
    if (!(a.hi > a.lo)) throw DomainError("GridFunction: axis bounds must satisfy lo < hi");
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t d = axes_.size() - 1; d > 0; --d) strides_[d - 1] = strides_[d] * axes_[d].nodes;
}

GridFunction GridFunction::sample(std::vector<Axis> axes,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction g(std::move(axes));
  std::vector<double> x(g.dims());
  std::vector<std::size_t> idx(g.dims(), 0);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    for (std::size_t d = 0; d < g.dims(); ++d) x[d] = g.axes_[d].coord(idx[d]);
    g.values_[flat] = f(x);
    for (std::size_t d = g.dims(); d-- > 0;) {
      if (++idx[d] < g.axes_[d].nodes) break;
      idx[d] = 0;
    }
  }
  return g;
}

std::size_t GridFunction::flat_index(std::span<const std::size_t> idx) const {
  if (idx.size() != axes_.size()) throw DomainError("GridFunction: index rank mismatch");
  std::size_t f = 0;
  for (std::size_t d = 0; d < idx.size(); ++d) f += idx[d] * strides_[d];
  return f;
}

std::vector<std::size_t> GridFunction::multi_index(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t d = 0; d < axes_.size(); ++d) {
    idx[d] = flat / strides_[d];
    flat %= strides_[d];
  }
  return idx;
}

std::vector<double> GridFunction::coords(std::size_t flat) const {
  auto idx = multi_index(flat);
  std::vector<double> x(idx.size());
  for (std::size_t d = 0; d < idx.size(); ++d) x[d] = axes_[d].coord(idx[d]);
  return x;
}

GridFunction GridFunction::coarsened() const {
  std::vector<Axis> ax = axes_;
  for (auto& a : ax) {
    if (a.periodic) {
      if (a.nodes % 2 != 0) throw ResolutionError("coarsened: odd periodic node count");
      a.nodes /= 2;
    } else {
      if ((a.nodes - 1) % 2 != 0) throw ResolutionError("coarsened: even interval node count");
      a.nodes = (a.nodes - 1) / 2 + 1;
    }
    if (a.nodes < 2) throw ResolutionError("coarsened: grid too small");
  }
  GridFunction c(ax);
  std::vector<std::size_t> src(dims());
  for (std::size_t flat = 0; flat < c.size(); ++flat) {
    auto idx = c.multi_index(flat);
    for (std::size_t d = 0; d < dims(); ++d) src[d] = 2 * idx[d];
    c.values_[flat] = values_[flat_index(src)];
  }
  return c;
}

double GridFunction::sup_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void DomainSpec::validate() const {
  if (!(radius > 0.0)) throw DomainError("DomainSpec: radius must be positive");
  if (action_width < 0.0 || angle_width < 0.0)
    throw DomainError("DomainSpec: widths must be non-negative");
  if (center.empty()) throw DomainError("DomainSpec: center must be set");
}

}  // namespace neklab::core
