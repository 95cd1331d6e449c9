#include "neklab/core/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "neklab/errors.hpp"

namespace neklab::core {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FftPlan::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan plan = nullptr;
};

FftPlan::FftPlan(const std::vector<int>& dims, Direction dir) : impl_(std::make_unique<Impl>()) {
  if (dims.empty()) throw DomainError("FftPlan: no dimensions");
  size_ = 1;
  for (int d : dims) {
    if (d < 1) throw DomainError("FftPlan: non-positive dimension");
    size_ *= static_cast<std::size_t>(d);
  }
  impl_->buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
  std::lock_guard lock(planner_mutex());
  impl_->plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), impl_->buf, impl_->buf,
                              dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!impl_->plan) {
    fftw_free(impl_->buf);
    throw ResolutionError("FftPlan: plan creation failed");
  }
}

FftPlan::~FftPlan() {
  if (!impl_) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(impl_->plan);
  fftw_free(impl_->buf);
}

std::complex<double>* FftPlan::buffer() const noexcept {
  return reinterpret_cast<std::complex<double>*>(impl_->buf);
}

void FftPlan::execute_buffer() const { fftw_execute(impl_->plan); }

void FftPlan::execute(std::vector<std::complex<double>>& data) const {
  if (data.size() != size_) throw DomainError("FftPlan: data length mismatch");
  std::memcpy(impl_->buf, data.data(), sizeof(fftw_complex) * size_);
  fftw_execute(impl_->plan);
  std::memcpy(static_cast<void*>(data.data()), impl_->buf, sizeof(fftw_complex) * size_);
}

}  // namespace neklab::core
