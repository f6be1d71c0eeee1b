#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rirkit {

/// Working sample rate of every stage. Audio at any other rate is rejected
/// at the file boundary rather than resampled.
inline constexpr int kSampleRate = 16000;

/// Reverberant-speech window length fed to the RIR encoder.
inline constexpr std::size_t kSegmentLength = 14400;

/// Mono audio at a fixed sample rate, stored as doubles.
///
/// Construction validates that every sample is finite and the rate is
/// positive; afterwards the buffer is an immutable value.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  explicit AudioBuffer(std::vector<double> samples, int sample_rate = kSampleRate);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& vector() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return sample_rate_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kSampleRate;
};

/// Full linear convolution (length len(x) + len(h) - 1) computed by FFT
/// overlap-add. Block size is the next power of two >= 4 * len(h), capped
/// at 2^18 (raised when h itself needs more room).
AudioBuffer convolve(const AudioBuffer& x, const AudioBuffer& h);

AudioBuffer scale(const AudioBuffer& x, double gain);

struct ConvLayer {
  std::size_t kernel_len = 1;
  std::size_t stride = 1;
  std::size_t out_channels = 1;
};

struct LayerPlan {
  std::vector<ConvLayer> layers;
};

struct PlanOutput {
  std::size_t output_len = 0;
  std::size_t downsample_factor = 1;
};

/// Frame count after a strided 1-D conv stack. Each layer pads by
/// (kernel_len - stride) so that floor((L + pad - kernel) / stride) + 1
/// equals floor(L / stride) and the overall factor is the stride product.
PlanOutput conv_plan_output_len(const LayerPlan& plan, std::size_t input_len);

/// Five strided blocks (2, 2, 3, 4, 5) with 2..32 channels; kernel = 2 * stride.
LayerPlan speech_encoder_plan();

/// Three layers: kernels 14401/41/41, strides 225/2/2, channels 256/512/1024.
LayerPlan rir_encoder_plan();

}  // namespace rirkit
