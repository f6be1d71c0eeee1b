#include "rirkit/geomat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iterator>
#include <unordered_map>

#include "rirkit/error.hpp"

namespace rirkit {

std::vector<std::string> material_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double token_similarity(const std::string& a, const std::string& b) {
  const auto ta = material_tokens(a), tb = material_tokens(b);
  if (ta.empty() || tb.empty()) return 0.0;
  std::vector<std::string> common;
  std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
  const std::size_t unions = ta.size() + tb.size() - common.size();
  return static_cast<double>(common.size()) / static_cast<double>(unions);
}

std::size_t match_material_index(const std::string& object_name,
                                 const std::vector<AbsorptionEntry>& db) {
  RIRKIT_REQUIRE(!db.empty(), "match_material: empty absorption database");
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < db.size(); ++i) {
    const double s = token_similarity(object_name, db[i].material_name);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (best_score > 0.0) return best;
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (db[i].material_name == kDefaultMaterial) return i;
  }
  throw_error("match_material: no token overlap for '" + object_name +
              "' and the database has no 'default' entry");
}

AbsorptionEntry match_material(const std::string& object_name,
                               const std::vector<AbsorptionEntry>& db) {
  return db[match_material_index(object_name, db)];
}

namespace {

int quantize_ac(double ac, const char* band) {
  RIRKIT_REQUIRE(ac >= 0.0 && ac <= 1.0, std::string("pack_channels: ") + band +
                                             " coefficient " + std::to_string(ac) +
                                             " outside [0, 1]");
  return static_cast<int>(std::lround(15.0 * ac));
}

}  // namespace

PackedChannels pack_channels(double ac125, double ac500, double ac2000, double ac8000) {
  const int q125 = quantize_ac(ac125, "ac125"), q500 = quantize_ac(ac500, "ac500");
  const int q2000 = quantize_ac(ac2000, "ac2000"), q8000 = quantize_ac(ac8000, "ac8000");
  return {static_cast<std::uint8_t>(q125 + 16 * q500),
          static_cast<std::uint8_t>(q2000 + 16 * q8000)};
}

QuantizedAbsorption unpack_channels(int c0, int c1) {
  RIRKIT_REQUIRE(c0 >= 0 && c0 <= 255 && c1 >= 0 && c1 <= 255,
                 "unpack_channels: channel values must be in [0, 255]");
  return {c0 % 16, c0 / 16, c1 % 16, c1 / 16};
}

GeoMatMap build_geomat(const SegmentationMap& seg, const Matrix<double>& depth_m,
                       const std::vector<AbsorptionEntry>& db) {
  const auto& labels = seg.labels;
  RIRKIT_REQUIRE(labels.rows == depth_m.rows && labels.cols == depth_m.cols,
                 "build_geomat: segmentation is " + std::to_string(labels.rows) + "x" +
                     std::to_string(labels.cols) + " but depth is " +
                     std::to_string(depth_m.rows) + "x" + std::to_string(depth_m.cols));
  RIRKIT_REQUIRE(!db.empty(), "build_geomat: empty absorption database");

  double depth_max = 0.0;
  for (double d : depth_m.data) {
    RIRKIT_REQUIRE(std::isfinite(d) && d >= 0.0, "build_geomat: depth must be finite and >= 0");
    depth_max = std::max(depth_max, d);
  }

  std::unordered_map<std::int32_t, PackedChannels> packed;
  for (std::int32_t label : labels.data) {
    if (packed.contains(label)) continue;
    const auto name = seg.label_names.find(label);
    RIRKIT_REQUIRE(name != seg.label_names.end(),
                   "build_geomat: label " + std::to_string(label) + " has no object name");
    const auto& e = match_material(name->second, db);
    packed.emplace(label, pack_channels(e.ac125, e.ac500, e.ac2000, e.ac8000));
  }

  GeoMatMap map;
  map.height = labels.rows;
  map.width = labels.cols;
  map.depth_scale = depth_max > 0.0 ? depth_max / 255.0 : 0.0;
  map.pixels.resize(map.height * map.width * 3);
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    const auto& pc = packed.at(labels.data[i]);
    map.pixels[3 * i] = pc.c0;
    map.pixels[3 * i + 1] = pc.c1;
    map.pixels[3 * i + 2] =
        depth_max > 0.0
            ? static_cast<std::uint8_t>(std::lround(255.0 * depth_m.data[i] / depth_max))
            : 0;
  }
  return map;
}

}  // namespace rirkit
