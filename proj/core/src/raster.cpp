// File formats for the Geo-Mat inputs and output.

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rirkit/blob.hpp"
#include "rirkit/error.hpp"
#include "rirkit/geomat.hpp"

namespace rirkit {

namespace {

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  RIRKIT_REQUIRE(in.good(), std::string(what) + ": cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw_error(what + ": " + e.what());
  }
}

// Next whitespace-delimited PNM header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

std::filesystem::path sidecar_path(const std::filesystem::path& png_path) {
  auto p = png_path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

Matrix<std::int32_t> read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  RIRKIT_REQUIRE(in.good(), "pgm: cannot open '" + path.string() + "'");
  RIRKIT_REQUIRE(pnm_token(in) == "P5", "pgm: '" + path.string() + "' is not a binary PGM (P5)");
  std::size_t width = 0, height = 0;
  long maxval = 0;
  try {
    width = std::stoul(pnm_token(in));
    height = std::stoul(pnm_token(in));
    maxval = std::stol(pnm_token(in));
  } catch (const std::exception&) {
    throw_error("pgm: malformed header in '" + path.string() + "'");
  }
  RIRKIT_REQUIRE(maxval >= 1 && maxval <= 65535, "pgm: maxval out of range");
  Matrix<std::int32_t> labels(height, width);
  const bool wide = maxval > 255;
  for (auto& v : labels.data) {
    unsigned char b[2] = {0, 0};
    in.read(reinterpret_cast<char*>(b), wide ? 2 : 1);
    RIRKIT_REQUIRE(in.good(), "pgm: truncated pixel data in '" + path.string() + "'");
    v = wide ? (b[0] << 8) | b[1] : b[0];
  }
  return labels;
}

void write_pgm16(const std::filesystem::path& path, const Matrix<std::int32_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  RIRKIT_REQUIRE(out.good(), "pgm: cannot create '" + path.string() + "'");
  out << "P5\n" << labels.cols << " " << labels.rows << "\n65535\n";
  for (std::int32_t v : labels.data) {
    RIRKIT_REQUIRE(v >= 0 && v <= 65535, "pgm: label out of 16-bit range");
    const char b[2] = {static_cast<char>((v >> 8) & 0xff), static_cast<char>(v & 0xff)};
    out.write(b, 2);
  }
}

std::map<std::int32_t, std::string> read_label_names(const std::filesystem::path& path) {
  const auto j = parse_json(read_text(path, "labels"), "labels json");
  RIRKIT_REQUIRE(j.is_object(), "labels json: expected an object of label -> name");
  std::map<std::int32_t, std::string> names;
  for (const auto& [key, value] : j.items()) {
    RIRKIT_REQUIRE(value.is_string(), "labels json: name for label " + key + " is not a string");
    try {
      names[std::stoi(key)] = value.get<std::string>();
    } catch (const std::logic_error&) {
      throw_error("labels json: key '" + key + "' is not an integer label");
    }
  }
  return names;
}

std::vector<AbsorptionEntry> parse_absorption_db(const std::string& json_text) {
  const auto j = parse_json(json_text, "absorption db");
  RIRKIT_REQUIRE(j.is_array(), "absorption db: expected a JSON array");
  std::vector<AbsorptionEntry> db;
  for (const auto& item : j) {
    AbsorptionEntry e;
    try {
      e.material_name = item.at("material_name").get<std::string>();
      e.ac125 = item.at("ac125").get<double>();
      e.ac500 = item.at("ac500").get<double>();
      e.ac2000 = item.at("ac2000").get<double>();
      e.ac8000 = item.at("ac8000").get<double>();
    } catch (const nlohmann::json::exception& ex) {
      throw_error(std::string("absorption db: ") + ex.what());
    }
    for (double ac : {e.ac125, e.ac500, e.ac2000, e.ac8000}) {
      RIRKIT_REQUIRE(ac >= 0.0 && ac <= 1.0, "absorption db: coefficient for '" +
                                                 e.material_name + "' outside [0, 1]");
    }
    db.push_back(std::move(e));
  }
  return db;
}

std::vector<AbsorptionEntry> read_absorption_db(const std::filesystem::path& path) {
  return parse_absorption_db(read_text(path, "absorption db"));
}

Matrix<double> read_depth_raster(const std::filesystem::path& path) {
  const FloatMatrix raw = read_float_blob(path);
  Matrix<double> depth(raw.rows, raw.cols);
  for (std::size_t i = 0; i < raw.data.size(); ++i) depth.data[i] = raw.data[i];
  return depth;
}

void write_geomat(const std::filesystem::path& png_path, const GeoMatMap& map) {
  RIRKIT_REQUIRE(map.pixels.size() == map.height * map.width * 3, "geomat: pixel buffer size mismatch");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(map.width);
  image.height = static_cast<png_uint_32>(map.height);
  image.format = PNG_FORMAT_RGB;
  const std::string file = png_path.string();
  if (png_image_write_to_file(&image, file.c_str(), 0, map.pixels.data(), 0, nullptr) == 0) {
    throw_error("geomat: cannot write PNG '" + file + "': " + image.message);
  }

  nlohmann::ordered_json meta;
  meta["depth_scale"] = map.depth_scale;
  meta["width"] = map.width;
  meta["height"] = map.height;
  meta["channels"] = {"ac125+16*ac500", "ac2000+16*ac8000", "depth"};
  meta["absorption_levels"] = 16;
  std::ofstream out(sidecar_path(png_path));
  RIRKIT_REQUIRE(out.good(), "geomat: cannot write sidecar JSON");
  out << meta.dump(2) << "\n";
}

GeoMatMap read_geomat(const std::filesystem::path& png_path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  const std::string file = png_path.string();
  if (png_image_begin_read_from_file(&image, file.c_str()) == 0) {
    throw_error("geomat: cannot read PNG '" + file + "': " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  GeoMatMap map;
  map.width = image.width;
  map.height = image.height;
  map.pixels.resize(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, map.pixels.data(), 0, nullptr) == 0) {
    throw_error("geomat: cannot decode PNG '" + file + "': " + image.message);
  }
  const auto meta = parse_json(read_text(sidecar_path(png_path), "geomat sidecar"), "geomat sidecar");
  map.depth_scale = meta.at("depth_scale").get<double>();
  return map;
}

}  // namespace rirkit
