#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace rirkit::detail {

// Real-input FFT of a fixed size backed by FFTW. Owns aligned work buffers,
// so one instance must not be shared between threads; separate instances
// may run concurrently (plan creation is serialized internally).
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // Unnormalized forward transform. `in` is zero-extended to size().
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Unnormalized inverse; callers divide by size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_ = nullptr;
  void* spectrum_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n);

}  // namespace rirkit::detail
