#include "rirkit/rvq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

float squared_distance(std::span<const float> a, std::span<const float> b) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const float d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double norm(std::span<const float> v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * x;
  return std::sqrt(acc);
}

// Residual layers keep entry 0 at the zero vector, so the greedy choice
// never increases the residual norm.
std::size_t first_trainable(std::size_t layer) { return layer == 0 ? 0 : 1; }

}  // namespace

void RvqConfig::validate() const {
  RIRKIT_REQUIRE(num_layers >= 1, "rvq config: num_layers must be >= 1");
  RIRKIT_REQUIRE(codebook_size >= 1, "rvq config: codebook_size must be >= 1");
  RIRKIT_REQUIRE(codebook_size <= (std::size_t{1} << 31), "rvq config: codebook_size too large");
  RIRKIT_REQUIRE(dim >= 1, "rvq config: dim must be >= 1");
  RIRKIT_REQUIRE(ema_decay > 0.0 && ema_decay < 1.0, "rvq config: ema_decay must be in (0, 1)");
  RIRKIT_REQUIRE(std::isfinite(commitment_beta) && commitment_beta >= 0.0,
                 "rvq config: commitment_beta must be finite and non-negative");
}

void RvqCodec::check_dim(std::size_t dim, const char* what) const {
  RIRKIT_REQUIRE(dim == config_.dim, std::string(what) + ": dimension mismatch (got " +
                                         std::to_string(dim) + ", codec has " +
                                         std::to_string(config_.dim) + ")");
}

RvqCodec RvqCodec::create(const RvqConfig& cfg, const FloatMatrix& init_batch) {
  cfg.validate();
  RIRKIT_REQUIRE(init_batch.rows > 0, "rvq: empty initialization batch");
  RvqCodec codec;
  codec.config_ = cfg;
  codec.check_dim(init_batch.cols, "rvq init");

  const std::size_t L = cfg.num_layers, K = cfg.codebook_size, D = cfg.dim;
  codec.codebooks_.assign(L * K * D, 0.0f);
  codec.ema_counts_.assign(L * K, 1.0f);

  // Residuals of every init row through the layers seeded so far. Layer l
  // samples its entries from them, then quantizes them for layer l + 1.
  const std::size_t N = init_batch.rows;
  std::vector<float> residual(init_batch.data);
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t k = first_trainable(l); k < K; ++k) {
      const auto pick = static_cast<std::size_t>(rng() % N);
      std::copy_n(residual.begin() + static_cast<std::ptrdiff_t>(pick * D), D,
                  codec.codebooks_.begin() + static_cast<std::ptrdiff_t>((l * K + k) * D));
    }
    if (l + 1 == L) break;
    for (std::size_t i = 0; i < N; ++i) {
      std::span<float> r(residual.data() + i * D, D);
      const auto e = codec.entry(l, codec.nearest(l, r));
      for (std::size_t d = 0; d < D; ++d) r[d] -= e[d];
    }
  }
  codec.ema_sums_ = codec.codebooks_;
  return codec;
}

std::span<const float> RvqCodec::entry(std::size_t layer, std::size_t index) const {
  const std::size_t D = config_.dim;
  return {codebooks_.data() + (layer * config_.codebook_size + index) * D, D};
}

std::size_t RvqCodec::nearest(std::size_t layer, std::span<const float> residual) const {
  std::size_t best = 0;
  float best_dist = squared_distance(residual, entry(layer, 0));
  for (std::size_t k = 1; k < config_.codebook_size; ++k) {
    const float d = squared_distance(residual, entry(layer, k));
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return best;
}

RvqEncoding RvqCodec::encode(std::span<const float> v, std::optional<std::size_t> layers) const {
  check_dim(v.size(), "rvq encode");
  const std::size_t depth = layers.value_or(config_.num_layers);
  RIRKIT_REQUIRE(depth <= config_.num_layers, "rvq encode: more layers requested than the codec has");
  RvqEncoding out;
  out.codes.reserve(depth);
  out.residual_norms.reserve(depth);
  out.reconstruction.assign(config_.dim, 0.0f);
  std::vector<float> residual(v.begin(), v.end());
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t k = nearest(l, residual);
    const auto e = entry(l, k);
    for (std::size_t d = 0; d < config_.dim; ++d) {
      out.reconstruction[d] += e[d];
      residual[d] -= e[d];
    }
    out.codes.push_back(static_cast<std::int32_t>(k));
    out.residual_norms.push_back(norm(residual));
  }
  return out;
}

IntMatrix RvqCodec::encode_batch(const FloatMatrix& vectors) const {
  check_dim(vectors.cols, "rvq encode");
  IntMatrix codes(vectors.rows, config_.num_layers);
  for (std::size_t i = 0; i < vectors.rows; ++i) {
    const auto enc = encode(vectors.row(i));
    std::copy(enc.codes.begin(), enc.codes.end(), codes.row(i).begin());
  }
  return codes;
}

FloatMatrix RvqCodec::decode(const IntMatrix& codes, std::optional<std::size_t> layers) const {
  const std::size_t depth = layers.value_or(codes.cols);
  RIRKIT_REQUIRE(codes.cols <= config_.num_layers,
                 "rvq decode: code grid has " + std::to_string(codes.cols) +
                     " layers, codec has " + std::to_string(config_.num_layers));
  RIRKIT_REQUIRE(depth <= codes.cols, "rvq decode: more layers requested than codes provide");
  FloatMatrix out(codes.rows, config_.dim);
  for (std::size_t i = 0; i < codes.rows; ++i) {
    auto dst = out.row(i);
    for (std::size_t l = 0; l < depth; ++l) {
      const std::int32_t k = codes.at(i, l);
      RIRKIT_REQUIRE(k >= 0 && static_cast<std::size_t>(k) < config_.codebook_size,
                     "rvq decode: code " + std::to_string(k) + " out of range at row " +
                         std::to_string(i) + ", layer " + std::to_string(l));
      const auto e = entry(l, static_cast<std::size_t>(k));
      for (std::size_t d = 0; d < config_.dim; ++d) dst[d] += e[d];
    }
  }
  return out;
}

RvqTrainStats RvqCodec::train_step(const FloatMatrix& batch) {
  RIRKIT_REQUIRE(batch.rows > 0, "rvq train: empty batch");
  check_dim(batch.cols, "rvq train");
  const std::size_t L = config_.num_layers, K = config_.codebook_size, D = config_.dim;
  const std::size_t N = batch.rows;

  std::vector<double> counts(L * K, 0.0), sums(L * K * D, 0.0);
  // Layer-wise inputs and post-layer residual norms, kept for reseeding.
  std::vector<float> layer_input(L * N * D);
  std::vector<double> post_norm(L * N);
  double sq_error = 0.0;

  std::vector<float> residual(D);
  for (std::size_t i = 0; i < N; ++i) {
    const auto x = batch.row(i);
    std::copy(x.begin(), x.end(), residual.begin());
    for (std::size_t l = 0; l < L; ++l) {
      std::copy(residual.begin(), residual.end(), layer_input.begin() +
                                                      static_cast<std::ptrdiff_t>((l * N + i) * D));
      const std::size_t k = nearest(l, residual);
      counts[l * K + k] += 1.0;
      double* s = sums.data() + (l * K + k) * D;
      const auto e = entry(l, k);
      for (std::size_t d = 0; d < D; ++d) {
        s[d] += residual[d];
        residual[d] -= e[d];
      }
      post_norm[l * N + i] = norm(residual);
    }
    for (float r : residual) sq_error += static_cast<double>(r) * r;
  }

  RvqTrainStats stats;
  stats.vq_loss = sq_error / static_cast<double>(N * D);
  stats.commitment_loss = config_.commitment_beta * stats.vq_loss;

  const double decay = config_.ema_decay;
  for (std::size_t l = 0; l < L; ++l) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t idx = l * K + k;
      const double c = decay * ema_counts_[idx] + (1.0 - decay) * counts[idx];
      ema_counts_[idx] = static_cast<float>(c);
      total += ema_counts_[idx];
      if (k < first_trainable(l)) continue;
      for (std::size_t d = 0; d < D; ++d) {
        const std::size_t j = idx * D + d;
        ema_sums_[j] = static_cast<float>(decay * ema_sums_[j] + (1.0 - decay) * sums[j]);
      }
    }
    const double denom = total + static_cast<double>(K) * kRvqLaplaceEpsilon;
    for (std::size_t k = first_trainable(l); k < K; ++k) {
      const std::size_t idx = l * K + k;
      const double smoothed = (ema_counts_[idx] + kRvqLaplaceEpsilon) / denom * total;
      for (std::size_t d = 0; d < D; ++d) {
        codebooks_[idx * D + d] = static_cast<float>(ema_sums_[idx * D + d] / smoothed);
      }
    }

    // Dead entries take the layer inputs of the worst-served vectors.
    std::vector<std::size_t> order;
    for (std::size_t k = first_trainable(l); k < K; ++k) {
      const std::size_t idx = l * K + k;
      if (ema_counts_[idx] >= kRvqDeadEntryThreshold) continue;
      if (order.empty()) {
        order.resize(N);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return post_norm[l * N + a] > post_norm[l * N + b];
        });
      }
      const std::size_t src = order[stats.reseeded % N];
      const float* in = layer_input.data() + (l * N + src) * D;
      std::copy(in, in + D, codebooks_.begin() + static_cast<std::ptrdiff_t>(idx * D));
      std::copy(in, in + D, ema_sums_.begin() + static_cast<std::ptrdiff_t>(idx * D));
      ema_counts_[idx] = 1.0f;
      ++stats.reseeded;
    }
  }
  return stats;
}

void RvqCodec::save(std::ostream& out) const {
  detail::put_u32(out, detail::fourcc("RKVQ"));
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(config_.num_layers));
  detail::put_u32(out, static_cast<std::uint32_t>(config_.codebook_size));
  detail::put_u32(out, static_cast<std::uint32_t>(config_.dim));
  detail::put_f64(out, config_.ema_decay);
  detail::put_f64(out, config_.commitment_beta);
  detail::put_u64(out, config_.seed);
  for (float v : codebooks_) detail::put_f32(out, v);
  for (float v : ema_counts_) detail::put_f32(out, v);
  for (float v : ema_sums_) detail::put_f32(out, v);
}

RvqCodec RvqCodec::load(std::istream& in) {
  RIRKIT_REQUIRE(detail::get_u32(in, "rvq checkpoint") == detail::fourcc("RKVQ"),
                 "rvq checkpoint: bad magic");
  const std::uint32_t version = detail::get_u32(in, "rvq checkpoint");
  RIRKIT_REQUIRE(version == kCheckpointVersion,
                 "rvq checkpoint: unsupported version " + std::to_string(version));
  RvqCodec codec;
  RvqConfig& cfg = codec.config_;
  cfg.num_layers = detail::get_u32(in, "rvq checkpoint");
  cfg.codebook_size = detail::get_u32(in, "rvq checkpoint");
  cfg.dim = detail::get_u32(in, "rvq checkpoint");
  cfg.ema_decay = detail::get_f64(in, "rvq checkpoint");
  cfg.commitment_beta = detail::get_f64(in, "rvq checkpoint");
  cfg.seed = detail::get_u64(in, "rvq checkpoint");
  cfg.validate();

  const std::size_t entries = cfg.num_layers * cfg.codebook_size;
  codec.codebooks_.resize(entries * cfg.dim);
  codec.ema_counts_.resize(entries);
  codec.ema_sums_.resize(entries * cfg.dim);
  for (float& v : codec.codebooks_) v = detail::get_f32(in, "rvq codebooks");
  for (float& v : codec.ema_counts_) v = detail::get_f32(in, "rvq ema counts");
  for (float& v : codec.ema_sums_) v = detail::get_f32(in, "rvq ema sums");
  for (float v : codec.codebooks_) RIRKIT_REQUIRE(std::isfinite(v), "rvq checkpoint: non-finite entry");
  for (float v : codec.ema_counts_) RIRKIT_REQUIRE(v >= 0.0f, "rvq checkpoint: negative ema count");
  return codec;
}

void RvqCodec::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  RIRKIT_REQUIRE(out.good(), "rvq checkpoint: cannot create '" + path.string() + "'");
  save(out);
  RIRKIT_REQUIRE(out.good(), "rvq checkpoint: write failed for '" + path.string() + "'");
}

RvqCodec RvqCodec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  RIRKIT_REQUIRE(in.good(), "rvq checkpoint: cannot open '" + path.string() + "'");
  return load(in);
}

double bitrate(const RvqConfig& cfg, double frames_per_second) {
  RIRKIT_REQUIRE(frames_per_second > 0.0 && std::isfinite(frames_per_second),
                 "bitrate: frames_per_second must be positive");
  RIRKIT_REQUIRE(cfg.num_layers >= 1 && cfg.codebook_size >= 1, "bitrate: invalid config");
  const auto bits_per_code = static_cast<double>(std::bit_width(cfg.codebook_size - 1));
  return static_cast<double>(cfg.num_layers) * bits_per_code * frames_per_second;
}

}  // namespace rirkit
