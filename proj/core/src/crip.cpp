#include "rirkit/crip.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rirkit/error.hpp"

namespace rirkit {

double Embedding::norm() const {
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  RIRKIT_REQUIRE(a.size() == b.size(), "cosine_similarity: dimension mismatch");
  const double na = a.norm(), nb = b.norm();
  RIRKIT_REQUIRE(na > 0.0 && nb > 0.0, "cosine_similarity: zero-norm embedding");
  const double dot = std::inner_product(a.values.begin(), a.values.end(), b.values.begin(), 0.0);
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

EmbeddingStore::EmbeddingStore(std::size_t dim, int sample_rate)
    : dim_(dim), sample_rate_(sample_rate) {
  RIRKIT_REQUIRE(dim_ >= 1, "store: embedding dimension must be >= 1");
  RIRKIT_REQUIRE(sample_rate_ > 0, "store: sample rate must be positive");
}

void EmbeddingStore::add_entry(std::string id, Embedding embedding, Rir rir) {
  RIRKIT_REQUIRE(!ids_.contains(id), "store: duplicate id '" + id + "'");
  RIRKIT_REQUIRE(embedding.size() == dim_, "store: embedding for '" + id + "' has dimension " +
                                               std::to_string(embedding.size()) +
                                               ", store expects " + std::to_string(dim_));
  RIRKIT_REQUIRE(rir.sample_rate() == sample_rate_,
                 "store: RIR for '" + id + "' has a different sample rate");
  for (double v : embedding.values) {
    RIRKIT_REQUIRE(std::isfinite(v), "store: non-finite embedding value for '" + id + "'");
  }
  const double n = embedding.norm();
  RIRKIT_REQUIRE(n > 0.0, "store: zero-norm embedding for '" + id + "'");
  ids_.insert(id);
  inverse_norms_.push_back(1.0 / n);
  entries_.push_back({std::move(id), std::move(embedding), std::move(rir)});
}

std::vector<RetrievalHit> EmbeddingStore::retrieve(const Embedding& query, std::size_t k) const {
  RIRKIT_REQUIRE(!entries_.empty(), "retrieve: store is empty");
  RIRKIT_REQUIRE(k >= 1, "retrieve: k must be >= 1");
  RIRKIT_REQUIRE(query.size() == dim_, "retrieve: query has dimension " +
                                           std::to_string(query.size()) + ", store expects " +
                                           std::to_string(dim_));
  const double qn = query.norm();
  RIRKIT_REQUIRE(qn > 0.0 && std::isfinite(qn), "retrieve: query must have finite nonzero norm");

  std::vector<double> sims(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i].embedding.values;
    const double dot = std::inner_product(e.begin(), e.end(), query.values.begin(), 0.0);
    sims[i] = std::clamp(dot * inverse_norms_[i] / qn, -1.0, 1.0);
  }

  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sims[a] != sims[b]) return sims[a] > sims[b];
                      return entries_[a].id < entries_[b].id;
                    });

  std::vector<RetrievalHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const auto& e = entries_[order[i]];
    hits.push_back({order[i], e.id, sims[order[i]], e.rir});
  }
  return hits;
}

ContrastiveResult contrastive_loss(const Matrix<double>& image_batch,
                                   const Matrix<double>& rir_batch, double temperature) {
  RIRKIT_REQUIRE(image_batch.rows == rir_batch.rows,
                 "contrastive_loss: batch sizes differ (" + std::to_string(image_batch.rows) +
                     " vs " + std::to_string(rir_batch.rows) + ")");
  RIRKIT_REQUIRE(image_batch.cols == rir_batch.cols, "contrastive_loss: embedding dims differ");
  RIRKIT_REQUIRE(image_batch.rows >= 1, "contrastive_loss: empty batch");
  RIRKIT_REQUIRE(temperature > 0.0 && std::isfinite(temperature),
                 "contrastive_loss: temperature must be positive");

  const std::size_t n = image_batch.rows;
  ContrastiveResult r;
  r.c_r2i = Matrix<double>(n, n);
  r.c_i2r = Matrix<double>(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto a = rir_batch.row(i), b = image_batch.row(j);
      const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
      r.c_r2i.at(i, j) = temperature * dot;
      r.c_i2r.at(j, i) = temperature * dot;
    }
  }

  // -(1/N) sum_i log softmax(row i)[i], via a max-shifted log-sum-exp.
  auto direction_loss = [n](const Matrix<double>& logits) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = logits.row(i);
      const double peak = *std::max_element(row.begin(), row.end());
      double sum = 0.0;
      for (double v : row) sum += std::exp(v - peak);
      acc += peak + std::log(sum) - row[i];
    }
    return acc / static_cast<double>(n);
  };
  r.loss_r2i = direction_loss(r.c_r2i);
  r.loss_i2r = direction_loss(r.c_i2r);
  r.loss = 0.5 * (r.loss_r2i + r.loss_i2r);
  return r;
}

void SpliceConfig::validate() const {
  RIRKIT_REQUIRE(boundary < end, "splice: boundary must be below end");
}

Rir splice_late(const Rir& est, const Rir& retrieved, const SpliceConfig& cfg) {
  cfg.validate();
  RIRKIT_REQUIRE(est.sample_rate() == retrieved.sample_rate(), "splice: sample-rate mismatch");
  RIRKIT_REQUIRE(est.size() >= cfg.end && retrieved.size() >= cfg.end,
                 "splice: RIRs must have at least " + std::to_string(cfg.end) +
                     " samples (estimate " + std::to_string(est.size()) + ", retrieved " +
                     std::to_string(retrieved.size()) + ")");
  std::vector<double> out = est.vector();
  for (std::size_t i = cfg.boundary; i < cfg.end; ++i) {
    out[i] = cfg.mode == SpliceMode::Replace ? retrieved[i] : out[i] + retrieved[i];
  }
  return Rir(std::move(out), est.sample_rate(), est.boundary());
}

AssembledEstimate assemble_estimate(const Rir& early_est, const EmbeddingStore& store,
                                    const Embedding& query, const SpliceConfig& cfg) {
  auto hits = store.retrieve(query, 1);
  auto& best = hits.front();
  return {splice_late(early_est, best.rir, cfg), std::move(best.id), best.similarity};
}

}  // namespace rirkit
