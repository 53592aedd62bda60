#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "ember/data.hpp"
#include "ember/encoder.hpp"
#include "ember/numerics.hpp"

namespace ember {

/// Window and sample counts for hard-negative mining: rank the corpus by
/// cosine against the query, then sample negatives from the rank window.
struct MiningConfig {
  std::size_t rank_lo = 50;   // 1-based, inclusive
  std::size_t rank_hi = 100;  // 1-based, inclusive
  std::size_t samples_per_query = 15;
  std::uint64_t seed = 0;
};

void validate_mining(const MiningConfig& config);

/// Corpus indices sorted by descending cosine against the query; ties break
/// by ascending corpus index.
std::vector<std::size_t> rank_corpus(const Vec& query_emb,
                                     const std::vector<Vec>& corpus_embs);

/// Negatives sampled uniformly without replacement from the ranked window
/// [rank_lo, min(rank_hi, corpus size)] minus gold indices. Deterministic
/// under config.seed. Throws WindowEmpty when the corpus cannot reach
/// rank_lo or the window is fully gold.
std::vector<std::size_t> mine_negatives(
    const Vec& query_emb, const std::vector<Vec>& corpus_embs,
    const std::unordered_set<std::size_t>& gold_indices,
    const MiningConfig& config);

/// Batch driver: fills each retrieval example's neg list with mined corpus
/// texts. Gold indices per query are the corpus entries equal to one of the
/// example's pos texts. Per-query RNG seed is config.seed ^ query index, so
/// results do not depend on processing order.
std::vector<RetrievalExample> mine_dataset(
    const std::vector<RetrievalExample>& examples,
    const std::vector<std::string>& corpus, const EncoderParams& params,
    const EncoderConfig& encoder_config, const MiningConfig& config);

}  // namespace ember
