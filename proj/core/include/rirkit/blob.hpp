#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rirkit/matrix.hpp"

namespace rirkit {

// Row-major matrices stored as 16-byte header (magic, version, rows, cols;
// little-endian u32 each) followed by the little-endian payload.
//   float payload: magic "RKF4"
//   int32 payload: magic "RKI4"
inline constexpr std::uint32_t kBlobVersion = 1;

using FloatMatrix = Matrix<float>;
using IntMatrix = Matrix<std::int32_t>;

void write_float_blob(std::ostream& out, const FloatMatrix& m);
void write_float_blob(const std::filesystem::path& path, const FloatMatrix& m);
FloatMatrix read_float_blob(std::istream& in);
FloatMatrix read_float_blob(const std::filesystem::path& path);

void write_int_blob(std::ostream& out, const IntMatrix& m);
void write_int_blob(const std::filesystem::path& path, const IntMatrix& m);
IntMatrix read_int_blob(std::istream& in);
IntMatrix read_int_blob(const std::filesystem::path& path);

}  // namespace rirkit
