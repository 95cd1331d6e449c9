#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace neklab::core {

/// One uniformly sampled axis. Periodic axes omit the duplicate endpoint:
/// node i sits at lo + i·(hi−lo)/nodes; non-periodic axes include both ends.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t nodes = 2;
  bool periodic = false;

  double step() const noexcept;
  double coord(std::size_t i) const noexcept;
  double length() const noexcept { return hi - lo; }
  bool operator==(const Axis&) const = default;

  static Axis angle(std::size_t nodes);
  static Axis interval(double lo, double hi, std::size_t nodes);
};

/// Samples of a real function on a tensor grid, stored row-major (last axis
/// fastest).
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(std::vector<Axis> axes);
  GridFunction(std::vector<Axis> axes, std::vector<double> values);

  static GridFunction sample(std::vector<Axis> axes,
                             const std::function<double(std::span<const double>)>& f);

  std::size_t dims() const noexcept { return axes_.size(); }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  const Axis& axis(std::size_t d) const { return axes_.at(d); }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t stride(std::size_t d) const { return strides_.at(d); }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }

  std::size_t flat_index(std::span<const std::size_t> idx) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  std::vector<double> coords(std::size_t flat) const;

  /// Every other node along each axis (periodic axes need an even count).
  GridFunction coarsened() const;

  double sup_abs() const noexcept;

 private:
  void init_strides();

  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

/// B_∞(center, radius) in the actions, with complex widths r (actions) and
/// s (angles).
struct DomainSpec {
  double radius = 1.0;
  double action_width = 0.0;
  double angle_width = 0.0;
  std::vector<double> center;

  void validate() const;
};

}  // namespace neklab::core
