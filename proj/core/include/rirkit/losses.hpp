#pragma once

#include <cstddef>
#include <vector>

#include "rirkit/acoustics.hpp"
#include "rirkit/matrix.hpp"
#include "rirkit/signal.hpp"

namespace rirkit {

/// Multi-resolution analysis settings shared by the Mel and STFT losses.
struct SpectralConfig {
  std::vector<std::size_t> window_lengths{64, 128, 256, 512, 1024, 2048, 4096};
  double hop_ratio = 0.25;
  std::size_t mel_bands = 80;
  double fmin = 0.0;
  double fmax = 8000.0;

  /// Throws unless window lengths are powers of two, 0 < hop_ratio <= 1,
  /// mel_bands >= 1 and 0 <= fmin < fmax <= sample_rate / 2.
  void validate(int sample_rate) const;
  std::size_t hop_for(std::size_t window_len) const;
};

/// Magnitude/phase of a one-sided STFT, frames x bins, row-major.
struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window_len = 0;
  std::vector<double> magnitude;
  std::vector<double> phase;  ///< radians in (-pi, pi]
};

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

struct DiscriminatorScores {
  std::vector<double> reverberant;
  std::vector<double> clean;
};

struct StftLoss {
  double magnitude = 0.0;
  double phase = 0.0;
  double total = 0.0;
};

/// Periodic Hann window, reflect padding of window_len / 2 on both sides,
/// 1 + len / hop frames.
ComplexSpectrogram stft(const AudioBuffer& x, std::size_t window_len, std::size_t hop);

/// HTK-scale triangular filters over window_len / 2 + 1 bins. Every row is
/// scaled to unit sum (rows that cover no bin stay zero).
Matrix<double> mel_filterbank(std::size_t window_len, int sample_rate, std::size_t bands,
                              double fmin, double fmax);

/// Mel-weighted power spectrogram, frames x mel_bands.
Matrix<double> mel_spectrogram(const AudioBuffer& x, const SpectralConfig& cfg,
                               std::size_t window_len);

/// Sum over resolutions of the element-mean L1 Mel distance for the
/// reverberant pair plus the clean pair.
double mel_loss(const AudioBuffer& reverberant_est, const AudioBuffer& reverberant,
                const AudioBuffer& clean_est, const AudioBuffer& clean,
                const SpectralConfig& cfg = {});

/// Element-normalized L2 distance between magnitude grids:
/// sqrt(mean((|A| - |B|)^2)).
double magnitude_distance(const ComplexSpectrogram& a, const ComplexSpectrogram& b);

/// RMS chord length between the unit-circle points (sin, cos) of the two
/// phase grids. Bins below 1e-8 magnitude in both inputs are skipped.
double phase_distance(const ComplexSpectrogram& a, const ComplexSpectrogram& b);

StftLoss stft_loss(const AudioBuffer& reverberant_est, const AudioBuffer& reverberant,
                   const AudioBuffer& clean_est, const AudioBuffer& clean,
                   const SpectralConfig& cfg = {});

double rir_mse(const Rir& estimate, const Rir& reference);

/// mel + lambda1 * stft_total + lambda2 * rir_mse
double metric_loss(double mel, double stft_total, double rir_mse, const LossWeights& w = {});

/// mean(max(0, 1 - D_R)) + mean(max(0, 1 - D_S))
double adversarial_hinge_loss(const DiscriminatorScores& scores);

/// metric + lambda1 * adversarial + lambda2 * (vq1 + vq2). The weights are
/// independent of the ones passed to metric_loss.
double generator_total_loss(double metric, double adversarial, double vq1, double vq2,
                            const LossWeights& w = {});

}  // namespace rirkit
