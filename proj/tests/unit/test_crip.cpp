#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "rirkit/crip.hpp"
#include "rirkit/error.hpp"

using rirkit::Embedding;
using rirkit::EmbeddingStore;
using rirkit::Rir;

namespace {

Embedding unit(std::size_t dim, std::size_t axis, double scale = 1.0) {
  Embedding e;
  e.values.assign(dim, 0.0);
  e.values[axis] = scale;
  return e;
}

Embedding random_embedding(std::mt19937_64& rng, std::size_t dim) {
  return Embedding{oracle::random_vector(rng, dim)};
}

Embedding scaled(const Embedding& e, double c) {
  Embedding out = e;
  for (double& v : out.values) v *= c;
  return out;
}

rirkit::Matrix<double> random_unit_rows(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g;
  rirkit::Matrix<double> m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) norm += std::pow(m.at(i, j) = g(rng), 2);
    for (std::size_t j = 0; j < d; ++j) m.at(i, j) /= std::sqrt(norm);
  }
  return m;
}

// Independent symmetric cross-entropy from raw dot products.
double oracle_contrastive(const rirkit::Matrix<double>& img, const rirkit::Matrix<double>& rir,
                          double tau) {
  const std::size_t n = img.rows;
  double r2i = 0.0, i2r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row_r(n), row_i(n);
    for (std::size_t j = 0; j < n; ++j) {
      double dr = 0.0, di = 0.0;
      for (std::size_t k = 0; k < img.cols; ++k) {
        dr += rir.at(i, k) * img.at(j, k);
        di += img.at(i, k) * rir.at(j, k);
      }
      row_r[j] = tau * dr;
      row_i[j] = tau * di;
    }
    r2i += oracle::cross_entropy(row_r, i);
    i2r += oracle::cross_entropy(row_i, i);
  }
  return 0.5 * (r2i + i2r) / static_cast<double>(n);
}

Rir ramp(std::size_t n, double offset) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = offset + 1e-3 * static_cast<double>(i);
  return Rir(std::move(v));
}

}  // namespace

TEST_CASE("cosine_similarity") {
  CHECK(rirkit::cosine_similarity(unit(3, 0), unit(3, 0, 5.0)) == doctest::Approx(1.0));
  CHECK(rirkit::cosine_similarity(unit(3, 0), unit(3, 1)) == 0.0);
  CHECK(rirkit::cosine_similarity(unit(3, 0), unit(3, 0, -2.0)) == doctest::Approx(-1.0));
}

TEST_CASE("store: add_entry validation") {
  EmbeddingStore store(4);
  store.add_entry("a", unit(4, 0), Rir({1.0}));
  CHECK(store.size() == 1);
  CHECK_THROWS_WITH_AS(store.add_entry("a", unit(4, 1), Rir({1.0})), doctest::Contains("duplicate"),
                       rirkit::Error);
  CHECK_THROWS_AS(store.add_entry("b", unit(3, 0), Rir({1.0})), rirkit::Error);
  CHECK_THROWS_AS(store.add_entry("c", Embedding{{0, 0, 0, 0}}, Rir({1.0})), rirkit::Error);
  CHECK_THROWS_AS(store.add_entry("d", Embedding{{NAN, 0, 0, 1}}, Rir({1.0})), rirkit::Error);
  CHECK_THROWS_AS(store.add_entry("e", unit(4, 2), Rir({1.0}, 8000)), rirkit::Error);
  CHECK(store.size() == 1);

  EmbeddingStore big;
  CHECK_THROWS_AS(big.add_entry("x", unit(3, 0), Rir({1.0})), rirkit::Error);
}

TEST_CASE("store: retrieval worked example and ordering") {
  EmbeddingStore store(3);
  store.add_entry("e3", unit(3, 2), Rir({3.0}));
  store.add_entry("e1", unit(3, 0), Rir({1.0}));
  store.add_entry("e2", unit(3, 1), Rir({2.0}));
  const auto hits = store.retrieve(Embedding{{1.0, 0.1, 0.0}}, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].id == "e1");
  CHECK(hits[1].id == "e2");
  CHECK(hits[2].id == "e3");
  CHECK(hits[0].similarity == doctest::Approx(0.9950).epsilon(1e-4));
  CHECK(hits[1].similarity == doctest::Approx(0.0995).epsilon(1e-3));
  CHECK(hits[2].similarity == doctest::Approx(0.0));
  CHECK(hits[0].rir[0] == 1.0);
  CHECK(hits[0].index == 1);

  CHECK(store.retrieve(unit(3, 0), 10).size() == 3);
  CHECK_THROWS_AS(store.retrieve(unit(2, 0), 1), rirkit::Error);
  CHECK_THROWS_AS(store.retrieve(unit(3, 0), 0), rirkit::Error);
}

TEST_CASE("store: ties are ordered by id") {
  EmbeddingStore store(2);
  store.add_entry("zeta", unit(2, 0), Rir({1.0}));
  store.add_entry("alpha", unit(2, 0, 3.0), Rir({2.0}));
  store.add_entry("mid", unit(2, 1), Rir({3.0}));
  const auto hits = store.retrieve(unit(2, 0), 2);
  CHECK(hits[0].id == "alpha");
  CHECK(hits[1].id == "zeta");
}

TEST_CASE("store: property - self-recall and scale invariance") {
  std::mt19937_64 rng(21);
  EmbeddingStore store(32);
  std::vector<Embedding> keys;
  for (int i = 0; i < 300; ++i) {
    keys.push_back(random_embedding(rng, 32));
    store.add_entry("id" + std::to_string(i), keys.back(), Rir({static_cast<double>(i)}));
  }
  std::uniform_real_distribution<double> gain(0.01, 100.0);
  for (int i = 0; i < 300; ++i) {
    const auto hits = store.retrieve(keys[i], 5);
    REQUIRE(hits[0].id == "id" + std::to_string(i));
    CHECK(hits[0].similarity == doctest::Approx(1.0));
    const auto scaled_hits = store.retrieve(scaled(keys[i], gain(rng)), 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(scaled_hits[k].id == hits[k].id);
  }
}

TEST_CASE("store: save and load round trip") {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("rirkit_store_" + std::to_string(std::random_device{}()));
  std::mt19937_64 rng(22);
  EmbeddingStore store(8);
  for (int i = 0; i < 10; ++i) {
    // Float-representable values so the float-32 files round trip exactly.
    auto e = random_embedding(rng, 8);
    for (double& v : e.values) v = static_cast<float>(v);
    auto r = oracle::random_vector(rng, 10 + i);
    for (double& v : r) v = static_cast<float>(v);
    store.add_entry("room-" + std::to_string(i), e, Rir(r, 16000, static_cast<std::size_t>(i)));
  }
  rirkit::save_store(dir, store);
  const auto back = rirkit::load_store(dir);
  REQUIRE(back.size() == store.size());
  CHECK(back.dim() == 8);
  for (std::size_t i = 0; i < store.size(); ++i) {
    CHECK(back.entries()[i].id == store.entries()[i].id);
    CHECK(back.entries()[i].embedding.values == store.entries()[i].embedding.values);
    CHECK(back.entries()[i].rir == store.entries()[i].rir);
  }
  std::filesystem::remove(dir / "rirs.f32");
  CHECK_THROWS_AS(rirkit::load_store(dir), rirkit::Error);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(rirkit::load_store(dir), rirkit::Error);
}

TEST_CASE("contrastive_loss: worked examples") {
  rirkit::Matrix<double> one(1, 3, {0.3, 0.4, 0.5});
  CHECK(rirkit::contrastive_loss(one, one, 1.0).loss == doctest::Approx(0.0));

  rirkit::Matrix<double> eye(2, 2, {1, 0, 0, 1});
  const auto r = rirkit::contrastive_loss(eye, eye, 1.0);
  CHECK(std::abs(r.loss - 0.3133) < 1e-4);
  CHECK(r.loss_r2i == doctest::Approx(r.loss_i2r));
  CHECK(r.c_r2i.at(0, 0) == 1.0);
  CHECK(r.c_r2i.at(0, 1) == 0.0);

  const auto hot = rirkit::contrastive_loss(eye, eye);
  CHECK(hot.c_r2i.at(1, 1) == doctest::Approx(rirkit::kDefaultTemperature));
}

TEST_CASE("contrastive_loss: matches an independent cross-entropy") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng() % 9;
    const auto img = random_unit_rows(rng, n, 12);
    const auto rir = random_unit_rows(rng, n, 12);
    const auto r = rirkit::contrastive_loss(img, rir, 3.0);
    CHECK(r.loss == doctest::Approx(oracle_contrastive(img, rir, 3.0)).epsilon(1e-12));
    CHECK(r.loss >= 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) CHECK(r.c_i2r.at(i, j) == doctest::Approx(r.c_r2i.at(j, i)));
    }
  }
}

TEST_CASE("contrastive_loss: identity pairing beats every derangement, N <= 8") {
  std::mt19937_64 rng(24);
  for (int batch = 0; batch < 100; ++batch) {
    const std::size_t n = 2 + static_cast<std::size_t>(batch) % 7;
    const auto x = random_unit_rows(rng, n, 16);
    const double base = rirkit::contrastive_loss(x, x, 1.0).loss;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    while (std::next_permutation(perm.begin(), perm.end())) {
      bool derangement = true;
      for (std::size_t i = 0; i < n; ++i) derangement = derangement && perm[i] != i;
      if (!derangement) continue;
      rirkit::Matrix<double> shuffled(n, 16);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 16; ++j) shuffled.at(i, j) = x.at(perm[i], j);
      }
      REQUIRE(base < rirkit::contrastive_loss(x, shuffled, 1.0).loss);
    }
  }
}

TEST_CASE("contrastive_loss: errors") {
  CHECK_THROWS_AS(rirkit::contrastive_loss(rirkit::Matrix<double>(2, 3), rirkit::Matrix<double>(3, 3)),
                  rirkit::Error);
  rirkit::Matrix<double> eye(2, 2, {1, 0, 0, 1});
  CHECK_THROWS_AS(rirkit::contrastive_loss(eye, eye, 0.0), rirkit::Error);
}

TEST_CASE("splice_late: worked examples") {
  const Rir ones(std::vector<double>(4000, 1.0)), zeros(std::vector<double>(4000, 0.0));
  const auto out = rirkit::splice_late(ones, zeros);
  for (std::size_t i = 0; i < 4000; ++i) REQUIRE(out[i] == (i < 2000 ? 1.0 : 0.0));
  CHECK(rirkit::splice_late(ones, ones) == ones);

  const Rir long_est(std::vector<double>(6000, 2.0));
  const auto out2 = rirkit::splice_late(long_est, zeros);
  REQUIRE(out2.size() == 6000);
  for (std::size_t i = 4000; i < 6000; ++i) REQUIRE(out2[i] == 2.0);

  const auto added = rirkit::splice_late(ones, ones, {2000, 4000, rirkit::SpliceMode::Add});
  CHECK(added[1999] == 1.0);
  CHECK(added[2000] == 2.0);

  CHECK_THROWS_AS(rirkit::splice_late(ones, Rir(std::vector<double>(3000, 0.0))), rirkit::Error);
  CHECK_THROWS_AS(rirkit::splice_late(Rir(std::vector<double>(3000, 0.0)), zeros), rirkit::Error);
  CHECK_THROWS_AS(rirkit::splice_late(ones, zeros, {3000, 2000}), rirkit::Error);
}

TEST_CASE("splice_late: property - regions come bitwise from their sources") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = 4000 + rng() % 4000;
    const Rir est(oracle::random_vector(rng, len)), ret(oracle::random_vector(rng, 4000 + rng() % 100));
    const auto out = rirkit::splice_late(est, ret);
    REQUIRE(out.size() == len);
    CHECK(out.boundary() == est.boundary());
    for (std::size_t i = 0; i < len; ++i) {
      REQUIRE(out[i] == (i >= 2000 && i < 4000 ? ret[i] : est[i]));
    }
  }
}

TEST_CASE("assemble_estimate: oracle store and errors") {
  const Rir gt = ramp(4000, 0.5);
  const Rir early_est = rirkit::split_early_late(gt, 2000).early;
  EmbeddingStore store(3);
  store.add_entry("gt", unit(3, 0), gt);
  store.add_entry("other", unit(3, 1), ramp(4000, -3.0));
  const auto a = rirkit::assemble_estimate(early_est, store, unit(3, 0, 2.0));
  CHECK(a.retrieved_id == "gt");
  CHECK(a.similarity == doctest::Approx(1.0));
  CHECK(a.rir == gt);
  CHECK_THROWS_AS(rirkit::assemble_estimate(early_est, EmbeddingStore(3), unit(3, 0)), rirkit::Error);
}
