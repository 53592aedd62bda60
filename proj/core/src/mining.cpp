#include "ember/mining.hpp"

#include <algorithm>
#include <string>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

void validate_mining(const MiningConfig& config) {
  if (config.rank_lo < 1 || config.rank_lo > config.rank_hi) {
    throw Error(ErrorCode::config_error, "need 1 <= rank_lo <= rank_hi");
  }
  if (config.samples_per_query < 1) {
    throw Error(ErrorCode::config_error, "samples_per_query must be >= 1");
  }
}

std::vector<std::size_t> rank_corpus(const Vec& query_emb,
                                     const std::vector<Vec>& corpus_embs) {
  if (corpus_embs.empty()) {
    throw Error(ErrorCode::empty_corpus, "rank_corpus: empty corpus");
  }
  Vec scores(corpus_embs.size());
  for (std::size_t i = 0; i < corpus_embs.size(); ++i) {
    scores[i] = cosine(query_emb, corpus_embs[i]);
  }
  std::vector<std::size_t> order(corpus_embs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

std::vector<std::size_t> mine_negatives(
    const Vec& query_emb, const std::vector<Vec>& corpus_embs,
    const std::unordered_set<std::size_t>& gold_indices,
    const MiningConfig& config) {
  validate_mining(config);
  const std::vector<std::size_t> ranked = rank_corpus(query_emb, corpus_embs);
  if (ranked.size() < config.rank_lo) {
    throw Error(ErrorCode::window_empty,
                "corpus of " + std::to_string(ranked.size()) +
                    " cannot reach rank " + std::to_string(config.rank_lo));
  }
  // Gold positives drop out after ranking so window positions match what a
  // retrieval dump would show.
  std::vector<std::size_t> window;
  const std::size_t hi = std::min(config.rank_hi, ranked.size());
  for (std::size_t r = config.rank_lo; r <= hi; ++r) {
    const std::size_t idx = ranked[r - 1];
    if (!gold_indices.count(idx)) window.push_back(idx);
  }
  if (window.empty()) {
    throw Error(ErrorCode::window_empty, "rank window holds only gold documents");
  }
  Rng rng(config.seed);
  const std::size_t want = std::min(config.samples_per_query, window.size());
  std::vector<std::size_t> picks = sample_without_replacement(window.size(), want, rng);
  std::vector<std::size_t> out;
  out.reserve(want);
  for (std::size_t p : picks) out.push_back(window[p]);
  return out;
}

std::vector<RetrievalExample> mine_dataset(
    const std::vector<RetrievalExample>& examples,
    const std::vector<std::string>& corpus, const EncoderParams& params,
    const EncoderConfig& encoder_config, const MiningConfig& config) {
  validate_mining(config);
  if (corpus.empty()) {
    throw Error(ErrorCode::empty_corpus, "mine_dataset: empty corpus");
  }
  std::vector<Vec> corpus_embs;
  corpus_embs.reserve(corpus.size());
  for (const std::string& doc : corpus) {
    corpus_embs.push_back(embed_text(doc, params, encoder_config));
  }

  std::vector<RetrievalExample> out = examples;
  for (std::size_t q = 0; q < out.size(); ++q) {
    std::unordered_set<std::size_t> gold;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (const std::string& pos : out[q].pos) {
        if (corpus[i] == pos) {
          gold.insert(i);
          break;
        }
      }
    }
    MiningConfig per_query = config;
    per_query.seed = config.seed ^ static_cast<std::uint64_t>(q);
    const Vec query_emb = embed_text(out[q].query, params, encoder_config);
    const std::vector<std::size_t> mined =
        mine_negatives(query_emb, corpus_embs, gold, per_query);
    out[q].neg.clear();
    for (std::size_t idx : mined) out[q].neg.push_back(corpus[idx]);
  }
  return out;
}

}  // namespace ember
