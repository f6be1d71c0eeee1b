#pragma once

#include <filesystem>
#include <iosfwd>

#include "rirkit/signal.hpp"

namespace rirkit {

enum class WavFormat { Pcm16, Float32 };

// Mono 16 kHz only. PCM-16 and IEEE float-32 payloads (plain or
// WAVE_FORMAT_EXTENSIBLE); anything else is rejected with a message naming
// the offending field.
AudioBuffer read_wav(std::istream& in);
AudioBuffer read_wav(const std::filesystem::path& path);

// PCM-16 output clips to [-1, 1).
void write_wav(std::ostream& out, const AudioBuffer& audio, WavFormat format = WavFormat::Float32);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavFormat format = WavFormat::Float32);

}  // namespace rirkit
