#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace neklab::core {

/// Multidimensional complex DFT (row-major, unnormalized) backed by FFTW.
/// Plans are created with FFTW_ESTIMATE so results do not depend on timing.
class FftPlan {
 public:
  enum class Direction { forward, backward };

  FftPlan(const std::vector<int>& dims, Direction dir);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return size_; }
  /// Transforms `data` (length size()) in place.
  void execute(std::vector<std::complex<double>>& data) const;
  /// Direct access to the aligned work buffer for callers that fill it themselves.
  std::complex<double>* buffer() const noexcept;
  void execute_buffer() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t size_ = 0;
};

}  // namespace neklab::core
