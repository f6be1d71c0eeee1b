#include "rirkit/blob.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "rirkit/error.hpp"

namespace rirkit {

namespace {

void write_header(std::ostream& out, std::uint32_t magic, std::size_t rows, std::size_t cols) {
  RIRKIT_REQUIRE(rows <= UINT32_MAX && cols <= UINT32_MAX, "blob: dimensions exceed u32");
  detail::put_u32(out, magic);
  detail::put_u32(out, kBlobVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(rows));
  detail::put_u32(out, static_cast<std::uint32_t>(cols));
}

std::pair<std::size_t, std::size_t> read_header(std::istream& in, std::uint32_t magic,
                                                const char* kind) {
  const std::uint32_t got = detail::get_u32(in, "blob header");
  RIRKIT_REQUIRE(got == magic, std::string("blob: bad magic, expected a ") + kind + " blob");
  const std::uint32_t version = detail::get_u32(in, "blob header");
  RIRKIT_REQUIRE(version == kBlobVersion,
                 "blob: unsupported version " + std::to_string(version));
  const std::size_t rows = detail::get_u32(in, "blob header");
  const std::size_t cols = detail::get_u32(in, "blob header");
  return {rows, cols};
}

template <typename Fn>
auto with_input(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  RIRKIT_REQUIRE(in.good(), "blob: cannot open '" + path.string() + "'");
  try {
    return fn(in);
  } catch (const Error& e) {
    throw_error(std::string(e.what()) + " in '" + path.string() + "'");
  }
}

template <typename Fn>
void with_output(const std::filesystem::path& path, Fn fn) {
  std::ofstream out(path, std::ios::binary);
  RIRKIT_REQUIRE(out.good(), "blob: cannot create '" + path.string() + "'");
  fn(out);
  RIRKIT_REQUIRE(out.good(), "blob: write failed for '" + path.string() + "'");
}

}  // namespace

void write_float_blob(std::ostream& out, const FloatMatrix& m) {
  RIRKIT_REQUIRE(m.data.size() == m.rows * m.cols, "blob: matrix size mismatch");
  write_header(out, detail::fourcc("RKF4"), m.rows, m.cols);
  for (float v : m.data) detail::put_f32(out, v);
}

FloatMatrix read_float_blob(std::istream& in) {
  const auto [rows, cols] = read_header(in, detail::fourcc("RKF4"), "float-32");
  FloatMatrix m(rows, cols);
  for (float& v : m.data) {
    v = detail::get_f32(in, "blob payload");
    RIRKIT_REQUIRE(std::isfinite(v), "blob: non-finite value in payload");
  }
  return m;
}

void write_int_blob(std::ostream& out, const IntMatrix& m) {
  RIRKIT_REQUIRE(m.data.size() == m.rows * m.cols, "blob: matrix size mismatch");
  write_header(out, detail::fourcc("RKI4"), m.rows, m.cols);
  for (std::int32_t v : m.data) detail::put_u32(out, static_cast<std::uint32_t>(v));
}

IntMatrix read_int_blob(std::istream& in) {
  const auto [rows, cols] = read_header(in, detail::fourcc("RKI4"), "int-32");
  IntMatrix m(rows, cols);
  for (auto& v : m.data) v = static_cast<std::int32_t>(detail::get_u32(in, "blob payload"));
  return m;
}

void write_float_blob(const std::filesystem::path& path, const FloatMatrix& m) {
  with_output(path, [&](std::ostream& out) { write_float_blob(out, m); });
}
FloatMatrix read_float_blob(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_float_blob(in); });
}
void write_int_blob(const std::filesystem::path& path, const IntMatrix& m) {
  with_output(path, [&](std::ostream& out) { write_int_blob(out, m); });
}
IntMatrix read_int_blob(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_int_blob(in); });
}

}  // namespace rirkit
