#include "rirkit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr double kPhaseMagnitudeFloor = 1e-8;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// numpy-style "reflect" (edge sample not repeated), extended periodically
// so signals shorter than the pad still work.
std::size_t reflect_index(long long i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<long long>(2 * (n - 1));
  long long m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<long long>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

void require_pair(const AudioBuffer& est, const AudioBuffer& ref, const char* what) {
  RIRKIT_REQUIRE(est.size() == ref.size(), std::string(what) + ": length mismatch (" +
                                               std::to_string(est.size()) + " vs " +
                                               std::to_string(ref.size()) + ")");
  RIRKIT_REQUIRE(est.sample_rate() == ref.sample_rate(),
                 std::string(what) + ": sample-rate mismatch");
}

void require_component(double v, const char* name) {
  RIRKIT_REQUIRE(std::isfinite(v) && v >= 0.0,
                 std::string("loss component '") + name + "' must be finite and non-negative");
}

void require_weights(const LossWeights& w) {
  RIRKIT_REQUIRE(std::isfinite(w.lambda1) && std::isfinite(w.lambda2) && w.lambda1 >= 0.0 &&
                     w.lambda2 >= 0.0,
                 "loss weights must be finite and non-negative");
}

double mean_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
  return a.data.empty() ? 0.0 : acc / static_cast<double>(a.data.size());
}

}  // namespace

void SpectralConfig::validate(int sample_rate) const {
  RIRKIT_REQUIRE(!window_lengths.empty(), "spectral config: no window lengths");
  for (std::size_t w : window_lengths) {
    RIRKIT_REQUIRE(is_pow2(w) && w >= 2,
                   "spectral config: window length " + std::to_string(w) + " is not a power of two");
  }
  RIRKIT_REQUIRE(hop_ratio > 0.0 && hop_ratio <= 1.0, "spectral config: hop_ratio must be in (0, 1]");
  RIRKIT_REQUIRE(mel_bands >= 1, "spectral config: mel_bands must be >= 1");
  RIRKIT_REQUIRE(fmin >= 0.0 && fmin < fmax, "spectral config: need 0 <= fmin < fmax");
  RIRKIT_REQUIRE(fmax <= sample_rate / 2.0,
                 "spectral config: fmax " + std::to_string(fmax) + " Hz exceeds Nyquist");
}

std::size_t SpectralConfig::hop_for(std::size_t window_len) const {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(hop_ratio * static_cast<double>(window_len))));
}

ComplexSpectrogram stft(const AudioBuffer& x, std::size_t window_len, std::size_t hop) {
  RIRKIT_REQUIRE(!x.empty(), "stft: empty signal");
  RIRKIT_REQUIRE(window_len >= 2 && hop >= 1, "stft: window_len must be >= 2 and hop >= 1");

  const std::size_t n = x.size();
  const std::size_t pad = window_len / 2;
  const std::size_t padded = n + 2 * pad;
  RIRKIT_REQUIRE(padded >= window_len, "stft: signal too short for window");

  ComplexSpectrogram out;
  out.window_len = window_len;
  out.bins = window_len / 2 + 1;
  out.frames = 1 + (padded - window_len) / hop;
  out.magnitude.resize(out.frames * out.bins);
  out.phase.resize(out.frames * out.bins);

  std::vector<double> window(window_len);
  for (std::size_t i = 0; i < window_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                     static_cast<double>(window_len));
  }

  detail::RealFft fft(window_len);
  std::vector<double> frame(window_len);
  std::vector<std::complex<double>> spec(out.bins);
  const auto s = x.samples();
  for (std::size_t f = 0; f < out.frames; ++f) {
    const long long start = static_cast<long long>(f * hop) - static_cast<long long>(pad);
    for (std::size_t i = 0; i < window_len; ++i) {
      frame[i] = s[reflect_index(start + static_cast<long long>(i), n)] * window[i];
    }
    fft.forward(frame, spec);
    for (std::size_t k = 0; k < out.bins; ++k) {
      double ph = std::arg(spec[k]);
      if (ph <= -std::numbers::pi) ph = std::numbers::pi;
      out.magnitude[f * out.bins + k] = std::abs(spec[k]);
      out.phase[f * out.bins + k] = ph;
    }
  }
  return out;
}

Matrix<double> mel_filterbank(std::size_t window_len, int sample_rate, std::size_t bands,
                              double fmin, double fmax) {
  RIRKIT_REQUIRE(bands >= 1 && window_len >= 2, "mel filterbank: bad dimensions");
  RIRKIT_REQUIRE(fmax <= sample_rate / 2.0, "mel filterbank: fmax exceeds Nyquist");
  const std::size_t bins = window_len / 2 + 1;
  Matrix<double> fb(bands, bins);

  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(bands + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(window_len);
  for (std::size_t m = 0; m < bands; ++m) {
    const double lo = edges[m], centre = edges[m + 1], hi = edges[m + 2];
    double sum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double up = (f - lo) / (centre - lo);
      const double down = (hi - f) / (hi - centre);
      const double w = std::max(0.0, std::min(up, down));
      fb.at(m, k) = w;
      sum += w;
    }
    if (sum > 0.0) {
      for (double& w : fb.row(m)) w /= sum;
    }
  }
  return fb;
}

Matrix<double> mel_spectrogram(const AudioBuffer& x, const SpectralConfig& cfg,
                               std::size_t window_len) {
  cfg.validate(x.sample_rate());
  const auto spec = stft(x, window_len, cfg.hop_for(window_len));
  const auto fb = mel_filterbank(window_len, x.sample_rate(), cfg.mel_bands, cfg.fmin, cfg.fmax);
  Matrix<double> mel(spec.frames, cfg.mel_bands);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const double* mag = spec.magnitude.data() + f * spec.bins;
    for (std::size_t m = 0; m < cfg.mel_bands; ++m) {
      double acc = 0.0;
      const auto weights = fb.row(m);
      for (std::size_t k = 0; k < spec.bins; ++k) acc += weights[k] * mag[k] * mag[k];
      mel.at(f, m) = acc;
    }
  }
  return mel;
}

double mel_loss(const AudioBuffer& reverberant_est, const AudioBuffer& reverberant,
                const AudioBuffer& clean_est, const AudioBuffer& clean, const SpectralConfig& cfg) {
  require_pair(reverberant_est, reverberant, "mel_loss");
  require_pair(clean_est, clean, "mel_loss");
  double total = 0.0;
  for (std::size_t w : cfg.window_lengths) {
    total += mean_abs_diff(mel_spectrogram(reverberant, cfg, w),
                           mel_spectrogram(reverberant_est, cfg, w));
    total += mean_abs_diff(mel_spectrogram(clean, cfg, w), mel_spectrogram(clean_est, cfg, w));
  }
  return total;
}

double magnitude_distance(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  RIRKIT_REQUIRE(a.frames == b.frames && a.bins == b.bins, "magnitude_distance: shape mismatch");
  if (a.magnitude.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.magnitude.size(); ++i) {
    const double d = a.magnitude[i] - b.magnitude[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.magnitude.size()));
}

double phase_distance(const ComplexSpectrogram& a, const ComplexSpectrogram& b) {
  RIRKIT_REQUIRE(a.frames == b.frames && a.bins == b.bins, "phase_distance: shape mismatch");
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < a.phase.size(); ++i) {
    if (a.magnitude[i] < kPhaseMagnitudeFloor && b.magnitude[i] < kPhaseMagnitudeFloor) continue;
    const double ds = std::sin(a.phase[i]) - std::sin(b.phase[i]);
    const double dc = std::cos(a.phase[i]) - std::cos(b.phase[i]);
    acc += ds * ds + dc * dc;
    ++counted;
  }
  return counted == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(counted));
}

StftLoss stft_loss(const AudioBuffer& reverberant_est, const AudioBuffer& reverberant,
                   const AudioBuffer& clean_est, const AudioBuffer& clean, const SpectralConfig& cfg) {
  require_pair(reverberant_est, reverberant, "stft_loss");
  require_pair(clean_est, clean, "stft_loss");
  cfg.validate(reverberant.sample_rate());
  StftLoss loss;
  for (std::size_t w : cfg.window_lengths) {
    const std::size_t hop = cfg.hop_for(w);
    const auto r = stft(reverberant, w, hop), r_est = stft(reverberant_est, w, hop);
    const auto c = stft(clean, w, hop), c_est = stft(clean_est, w, hop);
    loss.magnitude += magnitude_distance(r, r_est) + magnitude_distance(c, c_est);
    loss.phase += phase_distance(r, r_est) + phase_distance(c, c_est);
  }
  loss.total = loss.magnitude + loss.phase;
  return loss;
}

double rir_mse(const Rir& estimate, const Rir& reference) {
  RIRKIT_REQUIRE(estimate.size() == reference.size(),
                 "rir_mse: length mismatch (" + std::to_string(estimate.size()) + " vs " +
                     std::to_string(reference.size()) + ")");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double d = estimate[i] - reference[i];
    acc += d * d;
  }
  return acc / static_cast<double>(estimate.size());
}

double metric_loss(double mel, double stft_total, double rir_mse_value, const LossWeights& w) {
  require_component(mel, "mel");
  require_component(stft_total, "stft");
  require_component(rir_mse_value, "rir_mse");
  require_weights(w);
  return mel + w.lambda1 * stft_total + w.lambda2 * rir_mse_value;
}

double adversarial_hinge_loss(const DiscriminatorScores& scores) {
  RIRKIT_REQUIRE(!scores.reverberant.empty() && !scores.clean.empty(),
                 "adversarial_hinge_loss: empty score list");
  auto hinge_mean = [](const std::vector<double>& s) {
    double acc = 0.0;
    for (double v : s) {
      RIRKIT_REQUIRE(std::isfinite(v), "adversarial_hinge_loss: non-finite score");
      acc += std::max(0.0, 1.0 - v);
    }
    return acc / static_cast<double>(s.size());
  };
  return hinge_mean(scores.reverberant) + hinge_mean(scores.clean);
}

double generator_total_loss(double metric, double adversarial, double vq1, double vq2,
                            const LossWeights& w) {
  require_component(metric, "metric");
  require_component(adversarial, "adversarial");
  require_component(vq1, "vq1");
  require_component(vq2, "vq2");
  require_weights(w);
  return metric + w.lambda1 * adversarial + w.lambda2 * (vq1 + vq2);
}

}  // namespace rirkit
