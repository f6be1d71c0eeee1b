#include "rirkit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rirkit/error.hpp"

namespace rirkit {

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.z - b.z) * (a.z - b.z));
}

ShoeboxRoom ShoeboxRoom::uniform(Vec3 dims, double absorption, double speed_of_sound) {
  ShoeboxRoom room{dims, {}, speed_of_sound};
  room.wall_absorption.fill(absorption);
  return room;
}

void ShoeboxRoom::validate() const {
  RIRKIT_REQUIRE(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0 && std::isfinite(volume()),
                 "room: dimensions must be positive and finite");
  for (double a : wall_absorption) {
    RIRKIT_REQUIRE(a > 0.0 && a <= 1.0, "room: wall absorption must be in (0, 1]");
  }
  RIRKIT_REQUIRE(speed_of_sound > 0.0 && std::isfinite(speed_of_sound),
                 "room: speed of sound must be positive");
}

bool ShoeboxRoom::contains(const Vec3& p) const {
  return p.x > 0.0 && p.x < dims.x && p.y > 0.0 && p.y < dims.y && p.z > 0.0 && p.z < dims.z;
}

namespace {

struct AxisImage {
  double offset;     // image coordinate minus listener coordinate
  double gain;       // product of wall reflection factors on this axis
  std::size_t order;
};

// Images along one axis within `reach` of the listener. An image (n, q)
// sits at (1 - 2q) * s + 2 n L and hits wall 0 |n - q| times and wall L
// |n| times.
std::vector<AxisImage> axis_images(double length, double source, double listener, double beta0,
                                   double beta1, double reach, std::size_t max_order) {
  std::vector<AxisImage> images;
  const auto span = static_cast<long long>(std::ceil(reach / (2.0 * length))) + 1;
  for (long long n = -span; n <= span; ++n) {
    for (int q = 0; q <= 1; ++q) {
      const double pos = (1 - 2 * q) * source + 2.0 * static_cast<double>(n) * length;
      const double offset = pos - listener;
      if (std::abs(offset) > reach) continue;
      const auto hits0 = static_cast<std::size_t>(std::llabs(n - q));
      const auto hits1 = static_cast<std::size_t>(std::llabs(n));
      if (hits0 + hits1 > max_order) continue;
      double gain = 1.0;
      for (std::size_t i = 0; i < hits0; ++i) gain *= beta0;
      for (std::size_t i = 0; i < hits1; ++i) gain *= beta1;
      images.push_back({offset, gain, hits0 + hits1});
    }
  }
  return images;
}

// Second-order DC-removal filter from Allen and Berkley's image method.
void highpass_allen_berkley(std::vector<double>& h, double cutoff_hz, double fs) {
  const double w = 2.0 * std::numbers::pi * cutoff_hz / fs;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double y0 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& x : h) {
    y2 = y1;
    y1 = y0;
    y0 = b1 * y1 + b2 * y2 + x;
    x = y0 + a1 * y1 + r1 * y2;
  }
}

}  // namespace

Rir simulate_rir(const ShoeboxRoom& room, const Vec3& source, const Vec3& listener,
                 const SimParams& params) {
  room.validate();
  RIRKIT_REQUIRE(params.rir_len >= 1, "simulate: rir_len must be >= 1");
  RIRKIT_REQUIRE(params.sample_rate > 0, "simulate: sample rate must be positive");
  RIRKIT_REQUIRE(params.highpass_hz >= 0.0 && params.highpass_hz < params.sample_rate / 2.0,
                 "simulate: highpass_hz must be in [0, fs/2)");
  RIRKIT_REQUIRE(room.contains(source), "simulate: source is outside the room");
  RIRKIT_REQUIRE(room.contains(listener), "simulate: listener is outside the room");
  RIRKIT_REQUIRE(distance(source, listener) > 0.0, "simulate: source and listener coincide");

  const double fs = params.sample_rate;
  const double c = room.speed_of_sound;
  // Anything farther than this lands past the last sample.
  const double reach = (static_cast<double>(params.rir_len) - 0.5) / fs * c;

  std::array<double, 6> beta{};
  for (std::size_t i = 0; i < 6; ++i) beta[i] = std::sqrt(1.0 - room.wall_absorption[i]);

  const auto xs = axis_images(room.dims.x, source.x, listener.x, beta[0], beta[1], reach, params.max_order);
  const auto ys = axis_images(room.dims.y, source.y, listener.y, beta[2], beta[3], reach, params.max_order);
  const auto zs = axis_images(room.dims.z, source.z, listener.z, beta[4], beta[5], reach, params.max_order);

  std::vector<double> h(params.rir_len, 0.0);
  const double reach2 = reach * reach;
  for (const auto& ix : xs) {
    for (const auto& iy : ys) {
      const std::size_t order_xy = ix.order + iy.order;
      if (order_xy > params.max_order) continue;
      const double d2_xy = ix.offset * ix.offset + iy.offset * iy.offset;
      if (d2_xy > reach2) continue;
      const double gain_xy = ix.gain * iy.gain;
      if (gain_xy == 0.0) continue;
      for (const auto& iz : zs) {
        if (order_xy + iz.order > params.max_order) continue;
        const double d2 = d2_xy + iz.offset * iz.offset;
        if (d2 > reach2) continue;
        const double gain = gain_xy * iz.gain;
        if (gain == 0.0) continue;
        const double d = std::sqrt(d2);
        const auto sample = static_cast<std::size_t>(std::llround(d / c * fs));
        if (sample < h.size()) h[sample] += gain / d;
      }
    }
  }
  if (params.highpass_hz > 0.0) highpass_allen_berkley(h, params.highpass_hz, fs);
  return Rir(std::move(h), params.sample_rate);
}

double sabine_t60(const ShoeboxRoom& room) {
  room.validate();
  const auto& a = room.wall_absorption;
  const double sx = room.dims.y * room.dims.z;
  const double sy = room.dims.x * room.dims.z;
  const double sz = room.dims.x * room.dims.y;
  const double total = sx * (a[0] + a[1]) + sy * (a[2] + a[3]) + sz * (a[4] + a[5]);
  RIRKIT_REQUIRE(total > 0.0, "sabine_t60: zero total absorption");
  return 0.161 * room.volume() / total;
}

Embedding room_descriptor(const ShoeboxRoom& room, const Vec3& source, const Vec3& listener,
                          std::size_t dim) {
  room.validate();
  RIRKIT_REQUIRE(dim >= kRoomDescriptorFeatures,
                 "room_descriptor: dim must be >= " + std::to_string(kRoomDescriptorFeatures));
  Embedding e;
  e.values.assign(dim, 0.0);
  auto& v = e.values;
  v[0] = room.dims.x;
  v[1] = room.dims.y;
  v[2] = room.dims.z;
  for (std::size_t i = 0; i < 6; ++i) v[3 + i] = room.wall_absorption[i];
  v[9] = source.x;
  v[10] = source.y;
  v[11] = source.z;
  v[12] = listener.x;
  v[13] = listener.y;
  v[14] = listener.z;
  v[15] = std::cbrt(room.volume());
  double mean_alpha = 0.0;
  for (double a : room.wall_absorption) mean_alpha += a / 6.0;
  v[16] = mean_alpha;
  v[17] = sabine_t60(room);
  return e;
}

}  // namespace rirkit
