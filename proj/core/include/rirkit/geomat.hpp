#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rirkit/matrix.hpp"

namespace rirkit {

/// Measured absorption coefficients of one material at four sub-bands.
struct AbsorptionEntry {
  std::string material_name;
  double ac125 = 0.0;
  double ac500 = 0.0;
  double ac2000 = 0.0;
  double ac8000 = 0.0;

  friend bool operator==(const AbsorptionEntry&, const AbsorptionEntry&) = default;
};

/// Name of the database entry used when nothing else shares a token.
inline constexpr const char* kDefaultMaterial = "default";

struct SegmentationMap {
  Matrix<std::int32_t> labels;  ///< H x W
  std::map<std::int32_t, std::string> label_names;
};

/// 3-channel, 8-bit feature map stored interleaved (y, x, channel).
/// Channels 0/1 hold packed low/high-band absorption, channel 2 depth.
struct GeoMatMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;  ///< height * width * 3
  double depth_scale = 0.0;          ///< meters per depth unit

  std::uint8_t at(std::size_t y, std::size_t x, std::size_t channel) const {
    return pixels[(y * width + x) * 3 + channel];
  }
  friend bool operator==(const GeoMatMap&, const GeoMatMap&) = default;
};

struct PackedChannels {
  std::uint8_t c0 = 0;  ///< q125 + 16 * q500
  std::uint8_t c1 = 0;  ///< q2000 + 16 * q8000
  friend bool operator==(const PackedChannels&, const PackedChannels&) = default;
};

struct QuantizedAbsorption {
  int q125 = 0, q500 = 0, q2000 = 0, q8000 = 0;
  friend bool operator==(const QuantizedAbsorption&, const QuantizedAbsorption&) = default;
};

/// Lowercased alphanumeric tokens, deduplicated and sorted.
std::vector<std::string> material_tokens(const std::string& text);

/// Token-set Jaccard similarity in [0, 1].
double token_similarity(const std::string& a, const std::string& b);

/// Index of the best lexical match. Ties go to the lowest index; a best
/// score of 0 falls back to the entry named kDefaultMaterial.
std::size_t match_material_index(const std::string& object_name,
                                 const std::vector<AbsorptionEntry>& db);
AbsorptionEntry match_material(const std::string& object_name,
                               const std::vector<AbsorptionEntry>& db);

/// 4-bit quantization round(15 * ac) per coefficient, packed two per byte.
PackedChannels pack_channels(double ac125, double ac500, double ac2000, double ac8000);
QuantizedAbsorption unpack_channels(int c0, int c1);

/// Depth is quantized to round(255 * d / max_depth); depth_scale records
/// max_depth / 255 (0 for an all-zero depth map).
GeoMatMap build_geomat(const SegmentationMap& seg, const Matrix<double>& depth_m,
                       const std::vector<AbsorptionEntry>& db);

// File boundary.

/// Binary PGM (P5), 8- or 16-bit (big-endian) samples.
Matrix<std::int32_t> read_pgm(const std::filesystem::path& path);
void write_pgm16(const std::filesystem::path& path, const Matrix<std::int32_t>& labels);

/// {"<label>": "<object name>", ...}
std::map<std::int32_t, std::string> read_label_names(const std::filesystem::path& path);

/// JSON array of {material_name, ac125, ac500, ac2000, ac8000}.
std::vector<AbsorptionEntry> read_absorption_db(const std::filesystem::path& path);
std::vector<AbsorptionEntry> parse_absorption_db(const std::string& json_text);

/// Float-32 blob (rows = H, cols = W) of depths in meters.
Matrix<double> read_depth_raster(const std::filesystem::path& path);

/// 8-bit RGB PNG plus a sidecar JSON next to it (same stem, .json) with
/// depth_scale, width, height.
void write_geomat(const std::filesystem::path& png_path, const GeoMatMap& map);
GeoMatMap read_geomat(const std::filesystem::path& png_path);

}  // namespace rirkit
