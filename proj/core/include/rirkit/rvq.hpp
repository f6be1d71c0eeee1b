#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rirkit/blob.hpp"

namespace rirkit {

struct RvqConfig {
  std::size_t num_layers = 64;
  std::size_t codebook_size = 8192;
  std::size_t dim = 0;
  double ema_decay = 0.99;
  double commitment_beta = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const RvqConfig&, const RvqConfig&) = default;
};

/// Laplace smoothing added to EMA cluster sizes.
inline constexpr double kRvqLaplaceEpsilon = 1e-5;
/// Entries whose EMA count falls below this are reseeded.
inline constexpr double kRvqDeadEntryThreshold = 1e-3;

struct RvqEncoding {
  std::vector<std::int32_t> codes;     ///< one per layer
  std::vector<float> reconstruction;   ///< sum of the selected entries
  std::vector<double> residual_norms;  ///< L2 norm of the residual after each layer
};

struct RvqTrainStats {
  double vq_loss = 0.0;          ///< mean squared quantization error per element
  double commitment_loss = 0.0;  ///< commitment_beta * vq_loss (reported only)
  std::size_t reseeded = 0;      ///< dead entries replaced during this step
};

/// Residual vector quantizer: a cascade of codebooks where layer l
/// quantizes what layers 0..l-1 left over. Codebooks are trained with
/// exponential-moving-average cluster statistics, not gradients.
///
/// encode/decode are const and may run concurrently on one instance;
/// train_step needs exclusive access.
class RvqCodec {
 public:
  /// Seeds every layer by sampling `init_batch` rows with replacement
  /// (deterministic in cfg.seed); layer l stores the layer-l residual of
  /// each sampled row, so deeper codebooks start at residual scale.
  /// Entry 0 of every layer after the first is pinned to the zero vector
  /// and never trained, so each extra layer can only shrink the residual.
  static RvqCodec create(const RvqConfig& cfg, const FloatMatrix& init_batch);

  const RvqConfig& config() const { return config_; }

  /// Greedy nearest-entry (L2) search per layer; ties go to the lower
  /// index. `layers` limits the cascade depth (default: all layers).
  RvqEncoding encode(std::span<const float> v, std::optional<std::size_t> layers = {}) const;

  /// Per-row codes, frames x num_layers.
  IntMatrix encode_batch(const FloatMatrix& vectors) const;

  /// Sums the indexed entries of the first `layers` layers (default: all
  /// columns of `codes`). Summation order matches encode, so
  /// decode(encode(v).codes) reproduces encode(v).reconstruction bitwise.
  FloatMatrix decode(const IntMatrix& codes, std::optional<std::size_t> layers = {}) const;

  /// One EMA step over `batch`. Assignments use the codebooks as they are
  /// on entry; the returned losses describe that pre-update state.
  RvqTrainStats train_step(const FloatMatrix& batch);

  std::span<const float> entry(std::size_t layer, std::size_t index) const;
  const std::vector<float>& codebooks() const { return codebooks_; }
  const std::vector<float>& ema_counts() const { return ema_counts_; }
  const std::vector<float>& ema_sums() const { return ema_sums_; }

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static RvqCodec load(std::istream& in);
  static RvqCodec load(const std::filesystem::path& path);

  friend bool operator==(const RvqCodec&, const RvqCodec&) = default;

 private:
  RvqCodec() = default;
  std::size_t nearest(std::size_t layer, std::span<const float> residual) const;
  void check_dim(std::size_t dim, const char* what) const;

  RvqConfig config_;
  std::vector<float> codebooks_;   // layers x size x dim
  std::vector<float> ema_counts_;  // layers x size
  std::vector<float> ema_sums_;    // layers x size x dim
};

inline RvqCodec new_codec(const RvqConfig& cfg, const FloatMatrix& init_batch) {
  return RvqCodec::create(cfg, init_batch);
}

/// num_layers * ceil(log2(codebook_size)) * frames_per_second
double bitrate(const RvqConfig& cfg, double frames_per_second);

}  // namespace rirkit
