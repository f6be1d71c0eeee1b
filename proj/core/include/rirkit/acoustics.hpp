#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rirkit/signal.hpp"

namespace rirkit {

/// Early/late split point used for EMSE/LMSE and the late-reverb splice
/// (125 ms at 16 kHz).
inline constexpr std::size_t kDefaultEarlyLateBoundary = 2000;

/// EDC values below this level are clamped.
inline constexpr double kEdcFloorDb = -120.0;

/// Half-width of the direct-path window around the absolute peak.
inline constexpr double kDirectWindowSeconds = 0.0025;

/// Room impulse response: finite samples, at least one of them, plus the
/// sample index where the late part starts. The boundary defaults to
/// min(kDefaultEarlyLateBoundary, size()).
class Rir {
 public:
  explicit Rir(std::vector<double> samples, int sample_rate = kSampleRate,
               std::optional<std::size_t> boundary = std::nullopt);

  static Rir from_audio(const AudioBuffer& audio, std::optional<std::size_t> boundary = std::nullopt);
  AudioBuffer to_audio() const { return AudioBuffer(samples_, sample_rate_); }

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& vector() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int sample_rate() const { return sample_rate_; }
  std::size_t boundary() const { return boundary_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  Rir with_boundary(std::size_t boundary) const;

  friend bool operator==(const Rir&, const Rir&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kSampleRate;
  std::size_t boundary_ = 0;
};

/// Schroeder backward-integrated energy in dB, 0 dB at index 0 and
/// non-increasing, clamped at kEdcFloorDb.
struct EdcCurve {
  std::vector<double> values_db;
  int sample_rate = kSampleRate;
};

EdcCurve energy_decay_curve(const Rir& h);

/// Reverberation time from a least-squares line over the [-5, -35] dB EDC
/// span, extrapolated to 60 dB. Throws if the EDC never reaches -35 dB.
double t60(const Rir& h);

/// Early decay time: 6x the time to decay 10 dB, from a line fit over the
/// [0, -10] dB EDC span.
double edt(const Rir& h);

/// Decay time from a line fitted to the EDC between `upper_db` and
/// `lower_db`, scaled to a 60 dB drop. With fewer than two EDC samples
/// inside the span the line through the two interpolated level crossings
/// is used instead.
double decay_time(const EdcCurve& edc, double upper_db, double lower_db);

struct DrrResult {
  double db = 0.0;
  bool unbounded = false;  ///< no reflected energy; db is +infinity
};

/// Direct-to-reverberant ratio. Direct energy is taken within
/// +-kDirectWindowSeconds of the absolute peak; everything else counts as
/// reflected.
DrrResult drr(const Rir& h);

struct EarlyLate {
  Rir early;
  Rir late;
};

/// early = h[0:boundary] zero-padded, late = h[boundary:] with leading
/// zeros; early + late == h exactly.
EarlyLate split_early_late(const Rir& h, std::size_t boundary);

enum class Region { Early, Late, Full };

/// Masked mean squared error: the squared difference is summed over the
/// region and divided by the full length, so early + late == full.
/// Region boundaries come from `b`; both RIRs must agree on length and
/// boundary.
double component_mse(const Rir& a, const Rir& b, Region region);

struct AcousticReport {
  double t60_error_ms = 0.0;
  double drr_error_db = 0.0;
  double edt_error_ms = 0.0;
  double emse = 0.0;
  double lmse = 0.0;

  friend bool operator==(const AcousticReport&, const AcousticReport&) = default;
};

/// Absolute metric differences plus EMSE/LMSE at the ground truth's
/// boundary.
AcousticReport acoustic_error_report(const Rir& est, const Rir& gt);

std::string to_json(const AcousticReport& report);
AcousticReport acoustic_report_from_json(const std::string& text);

}  // namespace rirkit
