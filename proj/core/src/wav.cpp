#include "rirkit/wav.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

FmtChunk parse_fmt(std::istream& in, std::uint32_t size) {
  RIRKIT_REQUIRE(size >= 16, "wav: fmt chunk too short");
  FmtChunk fmt;
  fmt.format = detail::get_u16(in, "wav fmt");
  fmt.channels = detail::get_u16(in, "wav fmt");
  fmt.sample_rate = detail::get_u32(in, "wav fmt");
  detail::get_u32(in, "wav fmt");  // byte rate
  detail::get_u16(in, "wav fmt");  // block align
  fmt.bits = detail::get_u16(in, "wav fmt");
  std::uint32_t consumed = 16;
  if (fmt.format == kFormatExtensible) {
    RIRKIT_REQUIRE(size >= 40, "wav: extensible fmt chunk too short");
    detail::get_u16(in, "wav fmt");  // cbSize
    detail::get_u16(in, "wav fmt");  // valid bits
    detail::get_u32(in, "wav fmt");  // channel mask
    // First two bytes of the sub-format GUID carry the plain format tag.
    fmt.format = detail::get_u16(in, "wav fmt");
    char guid_rest[14];
    detail::read_exact(in, guid_rest, sizeof guid_rest, "wav fmt");
    consumed = 40;
  }
  in.ignore(size - consumed);
  return fmt;
}

}  // namespace

AudioBuffer read_wav(std::istream& in) {
  RIRKIT_REQUIRE(detail::get_u32(in, "wav header") == detail::fourcc("RIFF"),
                 "wav: missing RIFF header");
  detail::get_u32(in, "wav header");
  RIRKIT_REQUIRE(detail::get_u32(in, "wav header") == detail::fourcc("WAVE"),
                 "wav: missing WAVE tag");

  FmtChunk fmt;
  bool have_fmt = false;
  std::uint32_t data_size = 0;
  while (true) {
    const std::uint32_t id = detail::get_u32(in, "wav chunk header");
    const std::uint32_t size = detail::get_u32(in, "wav chunk header");
    if (id == detail::fourcc("data")) {
      RIRKIT_REQUIRE(have_fmt, "wav: data chunk before fmt chunk");
      data_size = size;
      break;
    }
    if (id == detail::fourcc("fmt ")) {
      fmt = parse_fmt(in, size);
      have_fmt = true;
      if (size & 1) in.ignore(1);
    } else {
      in.ignore(size + (size & 1));
    }
  }

  RIRKIT_REQUIRE(fmt.channels == 1,
                 "wav: expected mono audio, got " + std::to_string(fmt.channels) + " channels");
  RIRKIT_REQUIRE(fmt.sample_rate == static_cast<std::uint32_t>(kSampleRate),
                 "wav: expected " + std::to_string(kSampleRate) + " Hz, got " +
                     std::to_string(fmt.sample_rate) + " Hz (resampling is not supported)");

  std::vector<double> samples;
  if (fmt.format == kFormatPcm && fmt.bits == 16) {
    samples.resize(data_size / 2);
    for (auto& s : samples) {
      const auto raw = static_cast<std::int16_t>(detail::get_u16(in, "wav samples"));
      s = static_cast<double>(raw) / 32768.0;
    }
  } else if (fmt.format == kFormatFloat && fmt.bits == 32) {
    samples.resize(data_size / 4);
    for (auto& s : samples) s = static_cast<double>(detail::get_f32(in, "wav samples"));
  } else {
    throw_error("wav: unsupported sample format (format tag " + std::to_string(fmt.format) +
                ", " + std::to_string(fmt.bits) + " bits); expected PCM-16 or float-32");
  }
  return AudioBuffer(std::move(samples), kSampleRate);
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  RIRKIT_REQUIRE(in.good(), "wav: cannot open '" + path.string() + "'");
  try {
    return read_wav(in);
  } catch (const Error& e) {
    throw_error(std::string(e.what()) + " in '" + path.string() + "'");
  }
}

void write_wav(std::ostream& out, const AudioBuffer& audio, WavFormat format) {
  RIRKIT_REQUIRE(audio.sample_rate() == kSampleRate, "wav: can only write 16 kHz audio");
  const std::uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
  const std::uint16_t tag = format == WavFormat::Pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t bytes_per_sample = bits / 8;
  const auto data_size = static_cast<std::uint32_t>(audio.size() * bytes_per_sample);

  detail::put_u32(out, detail::fourcc("RIFF"));
  detail::put_u32(out, 36 + data_size);
  detail::put_u32(out, detail::fourcc("WAVE"));
  detail::put_u32(out, detail::fourcc("fmt "));
  detail::put_u32(out, 16);
  detail::put_u16(out, tag);
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<std::uint32_t>(kSampleRate));
  detail::put_u32(out, static_cast<std::uint32_t>(kSampleRate) * bytes_per_sample);
  detail::put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  detail::put_u16(out, bits);
  detail::put_u32(out, detail::fourcc("data"));
  detail::put_u32(out, data_size);

  for (double s : audio.samples()) {
    if (format == WavFormat::Pcm16) {
      const double scaled = std::clamp(std::round(s * 32768.0), -32768.0, 32767.0);
      detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      detail::put_f32(out, static_cast<float>(s));
    }
  }
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio, WavFormat format) {
  std::ofstream out(path, std::ios::binary);
  RIRKIT_REQUIRE(out.good(), "wav: cannot create '" + path.string() + "'");
  write_wav(out, audio, format);
  RIRKIT_REQUIRE(out.good(), "wav: write failed for '" + path.string() + "'");
}

}  // namespace rirkit
