#pragma once

#include <array>
#include <cstddef>
#include <limits>

#include "rirkit/acoustics.hpp"
#include "rirkit/crip.hpp"

namespace rirkit {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

/// Rectangular room with one frequency-independent absorption coefficient
/// per wall, ordered x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
struct ShoeboxRoom {
  Vec3 dims;
  std::array<double, 6> wall_absorption{};
  double speed_of_sound = 343.0;

  static ShoeboxRoom uniform(Vec3 dims, double absorption, double speed_of_sound = 343.0);
  void validate() const;
  double volume() const { return dims.x * dims.y * dims.z; }
  bool contains(const Vec3& p) const;
};

struct SimParams {
  /// Reflection-order cap; images beyond rir_len are dropped regardless.
  std::size_t max_order = std::numeric_limits<std::size_t>::max();
  std::size_t rir_len = kSampleRate;
  int sample_rate = kSampleRate;
  /// Cutoff of the Allen-Berkley DC-removal high-pass applied to the
  /// impulse train; 0 leaves the raw image sum.
  double highpass_hz = 0.0;
};

/// Recommended cutoff when the RIR is used for decay measurements.
inline constexpr double kAllenBerkleyHighpassHz = 100.0;

/// Image-source RIR. Each image contributes prod(sqrt(1 - alpha))^hits / d
/// at sample round(d / c * fs). Late images pile up on the same samples
/// with equal sign; the optional high-pass removes that DC build-up.
Rir simulate_rir(const ShoeboxRoom& room, const Vec3& source, const Vec3& listener,
                 const SimParams& params = {});

/// 0.161 * V / sum(S_i * alpha_i)
double sabine_t60(const ShoeboxRoom& room);

/// Number of leading descriptor features before zero padding.
inline constexpr std::size_t kRoomDescriptorFeatures = 18;

/// Feature vector: dims, six absorptions, source, listener, cube-root
/// volume, mean absorption and Sabine T60, zero-padded to `dim`.
Embedding room_descriptor(const ShoeboxRoom& room, const Vec3& source, const Vec3& listener,
                          std::size_t dim = kDefaultEmbeddingDim);

}  // namespace rirkit
