#include "rirkit/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "fft.hpp"
#include "rirkit/error.hpp"

namespace rirkit {

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  RIRKIT_REQUIRE(sample_rate_ > 0, "sample rate must be positive");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw_error("non-finite sample at index " + std::to_string(i));
    }
  }
}

namespace {

constexpr std::size_t kMaxBlock = std::size_t{1} << 18;

std::size_t block_size(std::size_t signal_len, std::size_t filter_len) {
  std::size_t block = std::min(detail::next_pow2(4 * filter_len), kMaxBlock);
  block = std::max(block, detail::next_pow2(2 * filter_len));
  // A short signal fits in a single block.
  return std::min(block, detail::next_pow2(signal_len + filter_len - 1));
}

}  // namespace

AudioBuffer convolve(const AudioBuffer& x, const AudioBuffer& h) {
  RIRKIT_REQUIRE(!x.empty() && !h.empty(), "convolve: empty input");
  RIRKIT_REQUIRE(x.sample_rate() == h.sample_rate(),
                 "convolve: sample-rate mismatch (" + std::to_string(x.sample_rate()) + " vs " +
                     std::to_string(h.sample_rate()) + ")");

  const std::size_t n = x.size();
  const std::size_t m = h.size();
  const std::size_t out_len = n + m - 1;
  const std::size_t block = block_size(n, m);
  const std::size_t hop = block - m + 1;

  detail::RealFft fft(block);
  std::vector<std::complex<double>> filter_spec(fft.bins());
  fft.forward(h.samples(), filter_spec);

  std::vector<double> out(out_len, 0.0);
  std::vector<std::complex<double>> spec(fft.bins());
  std::vector<double> frame(block);
  const double norm = 1.0 / static_cast<double>(block);
  const auto xs = x.samples();

  for (std::size_t start = 0; start < n; start += hop) {
    const std::size_t count = std::min(hop, n - start);
    fft.forward(xs.subspan(start, count), spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= filter_spec[k];
    fft.inverse(spec, frame);
    const std::size_t valid = std::min(count + m - 1, out_len - start);
    for (std::size_t i = 0; i < valid; ++i) out[start + i] += frame[i] * norm;
  }
  return AudioBuffer(std::move(out), x.sample_rate());
}

AudioBuffer scale(const AudioBuffer& x, double gain) {
  RIRKIT_REQUIRE(std::isfinite(gain), "scale: gain must be finite");
  std::vector<double> out(x.samples().begin(), x.samples().end());
  for (double& s : out) s *= gain;
  return AudioBuffer(std::move(out), x.sample_rate());
}

PlanOutput conv_plan_output_len(const LayerPlan& plan, std::size_t input_len) {
  PlanOutput result;
  for (const auto& layer : plan.layers) {
    RIRKIT_REQUIRE(layer.stride >= 1 && layer.kernel_len >= 1,
                   "layer plan: stride and kernel length must be >= 1");
    result.downsample_factor *= layer.stride;
  }
  RIRKIT_REQUIRE(input_len >= result.downsample_factor,
                 "layer plan: input of " + std::to_string(input_len) +
                     " samples is shorter than the stride product " +
                     std::to_string(result.downsample_factor));

  // Padding is (kernel - stride), negative meaning a cropped tail. Each
  // layer sees len >= stride because input_len >= the stride product.
  std::size_t len = input_len;
  for (const auto& layer : plan.layers) {
    const auto kernel = static_cast<long long>(layer.kernel_len);
    const auto stride = static_cast<long long>(layer.stride);
    const long long padded = static_cast<long long>(len) + kernel - stride;
    len = static_cast<std::size_t>((padded - kernel) / stride + 1);
  }
  result.output_len = len;
  return result;
}

LayerPlan speech_encoder_plan() {
  LayerPlan plan;
  const std::size_t strides[] = {2, 2, 3, 4, 5};
  std::size_t channels = 2;
  for (std::size_t s : strides) {
    plan.layers.push_back({2 * s, s, channels});
    channels *= 2;
  }
  return plan;
}

LayerPlan rir_encoder_plan() {
  return LayerPlan{{{14401, 225, 256}, {41, 2, 512}, {41, 2, 1024}}};
}

}  // namespace rirkit
