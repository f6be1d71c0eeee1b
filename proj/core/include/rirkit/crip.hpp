#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_set>
#include <vector>

#include "rirkit/acoustics.hpp"
#include "rirkit/matrix.hpp"

namespace rirkit {

inline constexpr std::size_t kDefaultEmbeddingDim = 1024;
/// CLIP-style logit scale (about 1 / 0.07).
inline constexpr double kDefaultTemperature = 14.3;

struct Embedding {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double norm() const;
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

double cosine_similarity(const Embedding& a, const Embedding& b);

struct StoreEntry {
  std::string id;
  Embedding embedding;
  Rir rir;
};

struct RetrievalHit {
  std::size_t index = 0;
  std::string id;
  double similarity = 0.0;
  Rir rir;
};

/// Exact brute-force cosine datastore of (id, embedding, RIR) triples.
/// retrieve() is const and safe to call concurrently; add_entry() needs
/// exclusive access.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim = kDefaultEmbeddingDim, int sample_rate = kSampleRate);

  /// Rejects duplicate ids, dimension or sample-rate mismatches and
  /// non-finite or zero-norm embeddings.
  void add_entry(std::string id, Embedding embedding, Rir rir);

  /// Top-k by cosine similarity, descending; equal similarities are
  /// ordered by id.
  std::vector<RetrievalHit> retrieve(const Embedding& query, std::size_t k) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dim() const { return dim_; }
  int sample_rate() const { return sample_rate_; }
  const std::vector<StoreEntry>& entries() const { return entries_; }

 private:
  std::size_t dim_;
  int sample_rate_;
  std::vector<StoreEntry> entries_;
  std::vector<double> inverse_norms_;
  std::unordered_set<std::string> ids_;
};

/// On-disk layout inside `dir`: manifest.json, embeddings.f32 (count x dim)
/// and rirs.f32 (1 x total samples), both float-32 blobs.
void save_store(const std::filesystem::path& dir, const EmbeddingStore& store);
EmbeddingStore load_store(const std::filesystem::path& dir);

struct ContrastiveResult {
  double loss = 0.0;
  double loss_r2i = 0.0;
  double loss_i2r = 0.0;
  Matrix<double> c_r2i;  ///< temperature * rir . image^T
  Matrix<double> c_i2r;  ///< temperature * image . rir^T
};

/// Symmetric cross-entropy over the two similarity matrices: each
/// direction is -(1/N) sum_i log softmax(row i)[i], the result their mean.
ContrastiveResult contrastive_loss(const Matrix<double>& image_batch,
                                   const Matrix<double>& rir_batch,
                                   double temperature = kDefaultTemperature);

enum class SpliceMode {
  Replace,  ///< est[boundary:end) = retrieved[boundary:end)
  Add,      ///< est[boundary:end) += retrieved[boundary:end)
};

struct SpliceConfig {
  std::size_t boundary = kDefaultEarlyLateBoundary;
  std::size_t end = 2 * kDefaultEarlyLateBoundary;
  SpliceMode mode = SpliceMode::Replace;

  void validate() const;
};

/// Output keeps est's length and boundary; only [boundary, end) changes.
Rir splice_late(const Rir& est, const Rir& retrieved, const SpliceConfig& cfg = {});

struct AssembledEstimate {
  Rir rir;
  std::string retrieved_id;
  double similarity = 0.0;
};

/// splice_late(early_est, top-1 retrieval for `query`, cfg).
AssembledEstimate assemble_estimate(const Rir& early_est, const EmbeddingStore& store,
                                    const Embedding& query, const SpliceConfig& cfg = {});

}  // namespace rirkit
