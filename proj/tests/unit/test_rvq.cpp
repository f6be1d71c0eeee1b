#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "rirkit/error.hpp"
#include "rirkit/rvq.hpp"

using rirkit::FloatMatrix;
using rirkit::RvqCodec;
using rirkit::RvqConfig;

namespace {

template <typename T>
void put(std::string& s, T v) {
  const auto bits = std::bit_cast<std::array<char, sizeof(T)>>(v);
  s.append(bits.begin(), bits.end());  // little-endian host
}

// Checkpoint bytes written field by field, independent of RvqCodec::save.
RvqCodec codec_from_codebooks(std::size_t layers, std::size_t size, std::size_t dim,
                              const std::vector<float>& codebooks) {
  std::string s = "RKVQ";
  put<std::uint32_t>(s, 1);
  put<std::uint32_t>(s, static_cast<std::uint32_t>(layers));
  put<std::uint32_t>(s, static_cast<std::uint32_t>(size));
  put<std::uint32_t>(s, static_cast<std::uint32_t>(dim));
  put<double>(s, 0.99);
  put<double>(s, 0.25);
  put<std::uint64_t>(s, 0);
  for (float v : codebooks) put(s, v);
  for (std::size_t i = 0; i < layers * size; ++i) put(s, 1.0f);
  for (float v : codebooks) put(s, v);
  std::istringstream in(s);
  return RvqCodec::load(in);
}

FloatMatrix gaussian_batch(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  FloatMatrix m(rows, dim);
  for (float& v : m.data) v = n(rng);
  return m;
}

double squared_error(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (double(a[i]) - b[i]) * (double(a[i]) - b[i]);
  return acc;
}

}  // namespace

TEST_CASE("rvq: config validation") {
  std::mt19937_64 rng(1);
  const auto batch = gaussian_batch(rng, 4, 3);
  CHECK_THROWS_AS(RvqCodec::create({0, 4, 3}, batch), rirkit::Error);
  CHECK_THROWS_AS(RvqCodec::create({2, 0, 3}, batch), rirkit::Error);
  CHECK_THROWS_AS(RvqCodec::create({2, 4, 0}, batch), rirkit::Error);
  CHECK_THROWS_AS(RvqCodec::create({2, 4, 3, 1.5}, batch), rirkit::Error);
  CHECK_THROWS_WITH_AS(RvqCodec::create({2, 4, 5}, batch), doctest::Contains("dim"), rirkit::Error);
}

TEST_CASE("rvq: initialization is deterministic and draws from the batch") {
  std::mt19937_64 rng(2);
  const auto batch = gaussian_batch(rng, 16, 4);
  const RvqConfig cfg{3, 16, 4, 0.99, 0.25, 77};
  CHECK(RvqCodec::create(cfg, batch) == RvqCodec::create(cfg, batch));

  const auto codec = RvqCodec::create(cfg, batch);
  for (std::size_t k = 0; k < 16; ++k) {
    const auto e = codec.entry(0, k);
    bool found = false;
    for (std::size_t r = 0; r < batch.rows && !found; ++r) {
      found = std::equal(e.begin(), e.end(), batch.row(r).begin());
    }
    CHECK(found);
  }
  auto other = cfg;
  other.seed = 78;
  CHECK_FALSE(RvqCodec::create(other, batch) == codec);
}

TEST_CASE("rvq: encode worked examples") {
  const auto codec = codec_from_codebooks(1, 2, 2, {0, 0, 1, 1});
  const std::vector<float> v{0.9f, 1.2f};
  const auto enc = codec.encode(v);
  CHECK(enc.codes == std::vector<std::int32_t>{1});
  CHECK(enc.reconstruction == std::vector<float>{1.0f, 1.0f});
  REQUIRE(enc.residual_norms.size() == 1);
  CHECK(enc.residual_norms[0] == doctest::Approx(0.2236).epsilon(1e-4));

  const std::vector<float> exact{1.0f, 1.0f};
  CHECK(codec.encode(exact).residual_norms[0] == 0.0);
  CHECK_THROWS_AS(codec.encode(std::vector<float>{1.0f}), rirkit::Error);
}

TEST_CASE("rvq: ties go to the lowest index") {
  const auto codec = codec_from_codebooks(1, 3, 1, {2, -1, 1});
  CHECK(codec.encode(std::vector<float>{0.0f}).codes[0] == 1);
  CHECK(codec.encode(std::vector<float>{1.5f}).codes[0] == 0);
}

TEST_CASE("rvq: decode examples and errors") {
  const auto codec = codec_from_codebooks(2, 2, 2, {1, 2, 3, 4, 0.5f, 0.25f, 5, 6});
  const auto dec = codec.decode(rirkit::IntMatrix(1, 2, {0, 0}));
  CHECK(dec.data == std::vector<float>{1.5f, 2.25f});
  CHECK(codec.decode(rirkit::IntMatrix(1, 2, {1, 1}), 1).data == std::vector<float>{3, 4});
  CHECK_THROWS_WITH_AS(codec.decode(rirkit::IntMatrix(1, 2, {0, 2})), doctest::Contains("code"),
                       rirkit::Error);
  CHECK_THROWS_AS(codec.decode(rirkit::IntMatrix(1, 2, {-1, 0})), rirkit::Error);
  CHECK_THROWS_AS(codec.decode(rirkit::IntMatrix(1, 3, {0, 0, 0})), rirkit::Error);
}

TEST_CASE("rvq: residual layers keep a zero entry through training") {
  std::mt19937_64 rng(10);
  const auto batch = gaussian_batch(rng, 64, 4);
  auto codec = RvqCodec::create({3, 8, 4, 0.9, 0.25, 3}, batch);
  for (int step = 0; step < 100; ++step) codec.train_step(batch);
  for (std::size_t l = 1; l < 3; ++l) {
    for (float v : codec.entry(l, 0)) CHECK(v == 0.0f);
  }
}

TEST_CASE("rvq: property - codes in range and decode(encode) is bitwise") {
  std::mt19937_64 rng(3);
  const auto batch = gaussian_batch(rng, 64, 6);
  const auto codec = RvqCodec::create({5, 10, 6, 0.99, 0.25, 1}, batch);
  const auto probe = gaussian_batch(rng, 200, 6);
  const auto codes = codec.encode_batch(probe);
  REQUIRE(codes.rows == 200);
  REQUIRE(codes.cols == 5);
  for (auto c : codes.data) CHECK((c >= 0 && c < 10));
  const auto dec = codec.decode(codes);
  for (std::size_t r = 0; r < probe.rows; ++r) {
    const auto enc = codec.encode(probe.row(r));
    const auto row = dec.row(r);
    REQUIRE(std::equal(row.begin(), row.end(), enc.reconstruction.begin()));
  }
}

TEST_CASE("rvq: fixed point when the batch equals the codebook") {
  std::mt19937_64 rng(4);
  auto entries = gaussian_batch(rng, 8, 3);
  const auto codec0 = codec_from_codebooks(1, 8, 3, entries.data);
  auto codec = codec0;
  for (int step = 0; step < 5; ++step) {
    const auto stats = codec.train_step(entries);
    CHECK(stats.vq_loss == 0.0);
    CHECK(stats.commitment_loss == 0.0);
    CHECK(stats.reseeded == 0);
  }
  CHECK(codec.codebooks() == codec0.codebooks());
}

TEST_CASE("rvq: 32 distinct vectors are recovered by a 64-entry layer") {
  std::mt19937_64 rng(5);
  const auto batch = gaussian_batch(rng, 32, 8);
  auto codec = RvqCodec::create({1, 64, 8, 0.99, 0.25, 5}, batch);
  double loss = 1.0;
  int steps = 0;
  while (steps < 2000) {
    loss = codec.train_step(batch).vq_loss;
    ++steps;
    if (loss < 1e-4) break;
  }
  MESSAGE("converged after " << steps << " steps, loss " << loss);
  CHECK(loss < 1e-4);
}

TEST_CASE("rvq: single-layer loss is non-increasing over repeated identical batches") {
  std::mt19937_64 rng(6);
  const auto batch = gaussian_batch(rng, 128, 4);
  auto codec = RvqCodec::create({1, 16, 4, 0.99, 0.25, 6}, batch);
  double prev = codec.train_step(batch).vq_loss;
  for (int step = 1; step < 300; ++step) {
    const double loss = codec.train_step(batch).vq_loss;
    REQUIRE_MESSAGE(loss <= prev + 1e-9, "step " << step << ": " << prev << " -> " << loss);
    prev = loss;
  }
}

TEST_CASE("rvq: multi-layer training lowers the loss overall") {
  // Deeper layers chase residuals that shift as earlier layers move, so
  // individual steps may go up.
  std::mt19937_64 rng(6);
  const auto batch = gaussian_batch(rng, 128, 4);
  auto codec = RvqCodec::create({4, 16, 4, 0.99, 0.25, 6}, batch);
  const double first = codec.train_step(batch).vq_loss;
  double last = first;
  for (int step = 1; step < 300; ++step) last = codec.train_step(batch).vq_loss;
  CHECK(last < 0.5 * first);
}

TEST_CASE("rvq: training is deterministic") {
  std::mt19937_64 rng(7);
  const auto batch = gaussian_batch(rng, 50, 5);
  auto a = RvqCodec::create({3, 8, 5, 0.9, 0.25, 9}, batch);
  auto b = a;
  for (int step = 0; step < 50; ++step) {
    const auto sa = a.train_step(batch);
    const auto sb = b.train_step(batch);
    REQUIRE(sa.vq_loss == sb.vq_loss);
  }
  CHECK(a == b);
}

TEST_CASE("rvq: property - error non-increasing in decode depth on a trained codec") {
  std::mt19937_64 rng(8);
  const std::size_t L = 8, D = 8;
  const auto train = gaussian_batch(rng, 512, D);
  auto codec = RvqCodec::create({L, 32, D, 0.95, 0.25, 8}, train);
  for (int step = 0; step < 200; ++step) codec.train_step(train);

  const auto probe = gaussian_batch(rng, 1000, D);
  const auto codes = codec.encode_batch(probe);
  std::size_t violations = 0;
  for (std::size_t r = 0; r < probe.rows; ++r) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t depth = 1; depth <= L; ++depth) {
      rirkit::IntMatrix prefix(1, L);
      std::copy_n(codes.row(r).begin(), L, prefix.data.begin());
      const auto dec = codec.decode(prefix, depth);
      const double err = squared_error(probe.row(r), dec.row(0));
      if (err > prev * (1.0 + 1e-6) + 1e-12) ++violations;
      prev = err;
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("rvq: checkpoint round trip is bit-exact") {
  std::mt19937_64 rng(9);
  const auto batch = gaussian_batch(rng, 40, 6);
  auto codec = RvqCodec::create({3, 12, 6, 0.97, 0.3, 123}, batch);
  for (int step = 0; step < 20; ++step) codec.train_step(batch);
  std::stringstream ss;
  codec.save(ss);
  const auto bytes = ss.str();
  const auto back = RvqCodec::load(ss);
  CHECK(back == codec);
  CHECK(back.config().seed == 123);
  std::stringstream again;
  back.save(again);
  CHECK(again.str() == bytes);

  std::istringstream bad("XXXX");
  CHECK_THROWS_WITH_AS(RvqCodec::load(bad), doctest::Contains("bad magic"), rirkit::Error);
  std::istringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(RvqCodec::load(truncated), rirkit::Error);
}

TEST_CASE("rvq: bitrate") {
  RvqConfig cfg{64, 8192, 1};
  CHECK(std::round(rirkit::bitrate(cfg, 16000.0 / 240.0)) == 55467.0);
  CHECK(rirkit::bitrate({1, 2, 1}, 1.0) == 1.0);
  CHECK(rirkit::bitrate(cfg, 20.0) == 2.0 * rirkit::bitrate(cfg, 10.0));
}
