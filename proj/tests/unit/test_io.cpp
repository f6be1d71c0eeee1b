#include <doctest.h>

#include <cstdint>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rirkit/blob.hpp"
#include "rirkit/error.hpp"
#include "rirkit/wav.hpp"

namespace {

void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Hand-assembled WAV with an arbitrary header, independent of write_wav.
std::string make_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                     std::uint16_t bits, const std::string& payload, bool extra_chunk = false) {
  std::string fmt;
  put16(fmt, format);
  put16(fmt, channels);
  put32(fmt, rate);
  put32(fmt, rate * channels * bits / 8);
  put16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  put32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  if (extra_chunk) {
    body += "LIST";
    put32(body, 3);
    body += "abc";
    body.push_back('\0');  // pad byte
  }
  body += "data";
  put32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

}  // namespace

TEST_CASE("wav: float-32 round trip is exact for float-representable samples") {
  std::mt19937_64 rng(1);
  auto v = oracle::random_vector(rng, 1000);
  for (double& s : v) s = static_cast<float>(s);
  const rirkit::AudioBuffer audio(v);
  std::stringstream ss;
  rirkit::write_wav(ss, audio, rirkit::WavFormat::Float32);
  const auto back = rirkit::read_wav(ss);
  CHECK(back == audio);
}

TEST_CASE("wav: pcm-16 round trip on the 1/32768 grid") {
  std::vector<double> v;
  for (int k = -32768; k < 32768; k += 257) v.push_back(k / 32768.0);
  const rirkit::AudioBuffer audio(v);
  std::stringstream ss;
  rirkit::write_wav(ss, audio, rirkit::WavFormat::Pcm16);
  CHECK(rirkit::read_wav(ss) == audio);
}

TEST_CASE("wav: pcm-16 writer clips") {
  std::stringstream ss;
  rirkit::write_wav(ss, rirkit::AudioBuffer({2.0, -2.0}), rirkit::WavFormat::Pcm16);
  const auto back = rirkit::read_wav(ss);
  CHECK(back[0] == 32767.0 / 32768.0);
  CHECK(back[1] == -1.0);
}

TEST_CASE("wav: reader decodes hand-built files and skips unknown chunks") {
  std::string payload;
  put16(payload, 16384);
  put16(payload, static_cast<std::uint16_t>(-16384));
  std::istringstream in(make_wav(1, 1, 16000, 16, payload, true));
  const auto audio = rirkit::read_wav(in);
  REQUIRE(audio.size() == 2);
  CHECK(audio[0] == 0.5);
  CHECK(audio[1] == -0.5);
}

TEST_CASE("wav: reader rejects other rates, channel counts and encodings") {
  const std::string two(4, '\0');
  {
    std::istringstream in(make_wav(1, 1, 44100, 16, two));
    CHECK_THROWS_WITH_AS(rirkit::read_wav(in), doctest::Contains("44100 Hz"), rirkit::Error);
  }
  {
    std::istringstream in(make_wav(1, 2, 16000, 16, two));
    CHECK_THROWS_WITH_AS(rirkit::read_wav(in), doctest::Contains("mono"), rirkit::Error);
  }
  {
    std::istringstream in(make_wav(1, 1, 16000, 24, std::string(6, '\0')));
    CHECK_THROWS_WITH_AS(rirkit::read_wav(in), doctest::Contains("unsupported sample format"),
                         rirkit::Error);
  }
  {
    std::istringstream in("RIFX nonsense");
    CHECK_THROWS_AS(rirkit::read_wav(in), rirkit::Error);
  }
  CHECK_THROWS_WITH_AS(rirkit::read_wav(std::filesystem::path("/nonexistent/x.wav")),
                       doctest::Contains("cannot open"), rirkit::Error);
}

TEST_CASE("blob: float and int matrices round trip bit-exactly") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t rows = 1 + rng() % 20, cols = 1 + rng() % 33;
    rirkit::FloatMatrix f(rows, cols);
    rirkit::IntMatrix i(rows, cols);
    for (auto& v : f.data) v = static_cast<float>(oracle::random_vector(rng, 1, -1e6, 1e6)[0]);
    for (auto& v : i.data) v = static_cast<std::int32_t>(rng());
    std::stringstream fs, is;
    rirkit::write_float_blob(fs, f);
    rirkit::write_int_blob(is, i);
    CHECK(fs.str().size() == 16 + 4 * rows * cols);
    CHECK(rirkit::read_float_blob(fs) == f);
    CHECK(rirkit::read_int_blob(is) == i);
  }
}

TEST_CASE("blob: header layout and magic checks") {
  rirkit::FloatMatrix f(2, 3, {1, 2, 3, 4, 5, 6});
  std::stringstream ss;
  rirkit::write_float_blob(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "RKF4");
  CHECK(bytes[4] == 1);   // version
  CHECK(bytes[8] == 2);   // rows
  CHECK(bytes[12] == 3);  // cols

  std::istringstream wrong(bytes);
  CHECK_THROWS_WITH_AS(rirkit::read_int_blob(wrong), doctest::Contains("bad magic"), rirkit::Error);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_WITH_AS(rirkit::read_float_blob(truncated), doctest::Contains("end of file"),
                       rirkit::Error);
}
