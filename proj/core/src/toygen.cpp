#include "ember/toygen.hpp"

#include <set>

#include <json.hpp>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

namespace {

using nlohmann::json;

// Topics are 3-bit ids arranged in a similarity hierarchy: flipping bit 0
// reaches the topic's sibling, flipping bit 1 a cousin, flipping bit 2 a far
// topic. Scored pairs grade by that graph distance (3 = same topic, 2 =
// sibling, 1 = cousin, 0 = far), so reproducing the grades takes a model
// that learned the full ordering, not merely same-vs-different.
constexpr std::size_t kTopics = 8;

std::size_t sibling(std::size_t t) { return t ^ 1; }
std::size_t cousin(std::size_t t, Rng& rng) { return t ^ (2 + bounded(rng, 2)); }
std::size_t far_topic(std::size_t t, Rng& rng) {
  return t ^ (4 + bounded(rng, 4));
}
std::size_t any_other(std::size_t t, Rng& rng) {
  return t ^ (1 + bounded(rng, kTopics - 1));
}

// Every topic owns several mutually disjoint word pools. Queries (and the
// left side of scored pairs) draw from one pool, documents (and right sides)
// from another, and the labeled tasks from split pools of their own plus a
// one-word label name. No word appears in two pools or two topics, so raw
// character-n-gram overlap carries no cross-pool signal: scoring well on the
// evaluations requires the training stage to have aligned the pools that
// co-occur in supervision.
struct TopicPools {
  std::vector<std::string> query_side;  // queries, sts/pair left texts
  std::vector<std::string> doc_side;    // documents, sts/pair right texts
  std::vector<std::string> cls_a;       // classification texts, side A
  std::vector<std::string> cls_b;       // classification texts, side B
  std::vector<std::string> clu_a;       // clustering texts, side A
  std::vector<std::string> clu_b;       // clustering texts, side B
  std::string cls_label;
  std::string clu_label;
};

const char* kOnsets[] = {"b", "d",  "f",  "g",  "h",  "k",  "l",  "m",  "n",
                         "p", "r",  "s",  "t",  "v",  "z",  "br", "ch", "dr",
                         "st", "tr"};
constexpr std::size_t kOnsets_n = sizeof(kOnsets) / sizeof(kOnsets[0]);
const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
constexpr std::size_t kVowels_n = sizeof(kVowels) / sizeof(kVowels[0]);

std::string make_word(Rng& rng) {
  std::string word;
  for (int syllable = 0; syllable < 3; ++syllable) {
    word += kOnsets[bounded(rng, kOnsets_n)];
    word += kVowels[bounded(rng, kVowels_n)];
  }
  return word;
}

std::vector<TopicPools> make_pools(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x30cab));
  std::set<std::string> used;
  auto fresh = [&](std::size_t count) {
    std::vector<std::string> words;
    while (words.size() < count) {
      std::string word = make_word(rng);
      if (used.insert(word).second) words.push_back(std::move(word));
    }
    return words;
  };
  std::vector<TopicPools> pools(kTopics);
  for (TopicPools& p : pools) {
    p.query_side = fresh(8);
    p.doc_side = fresh(8);
    p.cls_a = fresh(4);
    p.cls_b = fresh(4);
    p.clu_a = fresh(4);
    p.clu_b = fresh(4);
    p.cls_label = fresh(1)[0];
    p.clu_label = fresh(1)[0];
  }
  return pools;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

/// k distinct pool words in a seeded order.
std::string phrase(const std::vector<std::string>& pool, std::size_t k,
                   Rng& rng) {
  std::vector<std::string> words;
  for (std::size_t i : sample_without_replacement(pool.size(), k, rng))
    words.push_back(pool[i]);
  return join(words);
}

std::string query_text(const TopicPools& p, Rng& rng) {
  return phrase(p.query_side, 4, rng);
}
std::string doc_text(const TopicPools& p, Rng& rng) {
  return phrase(p.doc_side, 6, rng);
}

std::string dump_line(const json& obj) { return obj.dump() + "\n"; }

// ---- train files ----

std::string gen_train_retrieval(const std::vector<TopicPools>& pools,
                                const ToyConfig& cfg, const char* task,
                                std::size_t per_topic, std::uint64_t salt) {
  Rng rng(mix_seed(cfg.seed, salt));
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < per_topic; ++i) {
      // Explicit negatives stay far: the fine sibling/cousin geometry is the
      // scored-pair supervision's job, not the retrieval hard negatives'.
      json negs = json::array();
      for (std::size_t k = 0; k < 2; ++k)
        negs.push_back(doc_text(pools[far_topic(t, rng)], rng));
      out += dump_line(json{{"task", task},
                            {"query", query_text(pools[t], rng)},
                            {"pos", json::array({doc_text(pools[t], rng)})},
                            {"neg", negs}});
    }
  }
  return out;
}

std::string gen_scored(const std::vector<TopicPools>& pools, std::uint64_t seed,
                       const char* task, std::size_t per_level_per_topic) {
  Rng rng(seed);
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < per_level_per_topic; ++i) {
      for (int level = 3; level >= 0; --level) {
        std::size_t b_topic = t;
        if (level == 2) b_topic = sibling(t);
        if (level == 1) b_topic = cousin(t, rng);
        if (level == 0) b_topic = far_topic(t, rng);
        out += dump_line(json{{"task", task},
                              {"text_a", query_text(pools[t], rng)},
                              {"text_b", doc_text(pools[b_topic], rng)},
                              {"score", static_cast<double>(level)}});
      }
    }
  }
  return out;
}

std::string gen_train_pairs(const std::vector<TopicPools>& pools,
                            const ToyConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x9a17));
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < cfg.pairs_per_topic; ++i) {
      const bool positive = i % 2 == 0;
      const std::size_t b_topic = positive ? t : far_topic(t, rng);
      out += dump_line(json{{"task", "pair_classification"},
                            {"text_a", query_text(pools[t], rng)},
                            {"text_b", doc_text(pools[b_topic], rng)},
                            {"score", positive ? 1.0 : 0.0}});
    }
  }
  return out;
}

std::string gen_train_labeled(const std::vector<TopicPools>& pools,
                              const ToyConfig& cfg, const char* task,
                              std::size_t per_topic, std::uint64_t salt,
                              bool clustering) {
  Rng rng(mix_seed(cfg.seed, salt));
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t) {
    json negs = json::array();
    for (std::size_t u = 0; u < kTopics; ++u)
      if (u != t)
        negs.push_back(clustering ? pools[u].clu_label : pools[u].cls_label);
    for (std::size_t i = 0; i < per_topic; ++i) {
      // Alternate the two text sides; only the shared label ties them.
      const TopicPools& p = pools[t];
      const std::vector<std::string>& side =
          clustering ? (i % 2 == 0 ? p.clu_a : p.clu_b)
                     : (i % 2 == 0 ? p.cls_a : p.cls_b);
      out += dump_line(json{{"task", task},
                            {"text", phrase(side, 3, rng)},
                            {"pos_label", clustering ? p.clu_label : p.cls_label},
                            {"neg_labels", negs}});
    }
  }
  return out;
}

// ---- eval files ----

std::string gen_eval_classification(const ToyConfig& cfg,
                                    const std::vector<TopicPools>& pools) {
  Rng rng(mix_seed(cfg.seed, 0xec1a));
  std::string out;
  // Train split comes from side A, test split from side B: nearest-centroid
  // transfer across the sides only works once training tied them together.
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < cfg.eval_cls_train_per_topic; ++i)
      out += dump_line(json{{"task", "classification"},
                            {"text", phrase(pools[t].cls_a, 3, rng)},
                            {"label", pools[t].cls_label},
                            {"split", "train"}});
    for (std::size_t i = 0; i < cfg.eval_cls_test_per_topic; ++i)
      out += dump_line(json{{"task", "classification"},
                            {"text", phrase(pools[t].cls_b, 3, rng)},
                            {"label", pools[t].cls_label},
                            {"split", "test"}});
  }
  return out;
}

std::string gen_eval_clustering(const ToyConfig& cfg,
                                const std::vector<TopicPools>& pools) {
  Rng rng(mix_seed(cfg.seed, 0xec1b));
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < cfg.eval_clu_per_topic; ++i) {
      const std::vector<std::string>& side =
          (i % 2 == 0) ? pools[t].clu_a : pools[t].clu_b;
      out += dump_line(json{{"task", "clustering"},
                            {"text", phrase(side, 3, rng)},
                            {"cluster", pools[t].clu_label}});
    }
  }
  return out;
}

std::string gen_eval_pairs(const ToyConfig& cfg,
                           const std::vector<TopicPools>& pools) {
  Rng rng(mix_seed(cfg.seed, 0xec1c));
  std::string out;
  const std::size_t n = cfg.eval_pairs_per_topic + (cfg.eval_pairs_per_topic & 1);
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool positive = i % 2 == 0;
      // Negatives span every relation, so a model that merged siblings pays.
      const std::size_t b_topic = positive ? t : any_other(t, rng);
      out += dump_line(json{{"task", "pair_classification"},
                            {"text_a", query_text(pools[t], rng)},
                            {"text_b", doc_text(pools[b_topic], rng)},
                            {"label", positive ? 1 : 0}});
    }
  }
  return out;
}

std::string gen_eval_sts(const ToyConfig& cfg,
                         const std::vector<TopicPools>& pools) {
  return gen_scored(pools, mix_seed(cfg.seed, 0xec1d), "sts",
                    cfg.eval_sts_per_level_per_topic);
}

std::string gen_eval_retrieval(const ToyConfig& cfg,
                               const std::vector<TopicPools>& pools) {
  Rng rng(mix_seed(cfg.seed, 0xec1e));
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t)
    for (std::size_t i = 0; i < cfg.eval_docs_per_topic; ++i)
      out += dump_line(json{{"task", "retrieval"},
                            {"type", "doc"},
                            {"text", doc_text(pools[t], rng)}});
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < cfg.eval_queries_per_topic; ++i) {
      json relevant = json::array();
      for (std::size_t d = 0; d < cfg.eval_docs_per_topic; ++d)
        relevant.push_back(t * cfg.eval_docs_per_topic + d);
      out += dump_line(json{{"task", "retrieval"},
                            {"type", "query"},
                            {"text", query_text(pools[t], rng)},
                            {"relevant", relevant}});
    }
  }
  return out;
}

std::string gen_eval_reranking(const ToyConfig& cfg,
                               const std::vector<TopicPools>& pools) {
  Rng rng(mix_seed(cfg.seed, 0xec1f));
  std::string out;
  for (std::size_t t = 0; t < kTopics; ++t) {
    for (std::size_t i = 0; i < cfg.eval_rerank_per_topic; ++i) {
      std::vector<std::pair<std::string, int>> cands;
      cands.emplace_back(doc_text(pools[t], rng), 1);
      cands.emplace_back(doc_text(pools[t], rng), 1);
      for (std::size_t k = 0; k < 6; ++k)
        cands.emplace_back(doc_text(pools[any_other(t, rng)], rng), 0);
      shuffle(cands, rng);
      json candidates = json::array();
      json relevant = json::array();
      for (std::size_t c = 0; c < cands.size(); ++c) {
        candidates.push_back(cands[c].first);
        if (cands[c].second) relevant.push_back(c);
      }
      out += dump_line(json{{"task", "reranking"},
                            {"query", query_text(pools[t], rng)},
                            {"candidates", candidates},
                            {"relevant", relevant}});
    }
  }
  return out;
}

}  // namespace

std::vector<GeneratedFile> generate_toy_suite(const ToyConfig& cfg) {
  if (cfg.retrieval_per_topic == 0 || cfg.labeled_per_topic == 0)
    throw Error(ErrorCode::config_error, "per-topic sizes must be >= 1");
  const std::vector<TopicPools> pools = make_pools(cfg.seed);
  std::vector<GeneratedFile> files;
  files.push_back({"train_retrieval.jsonl",
                   gen_train_retrieval(pools, cfg, "retrieval",
                                       cfg.retrieval_per_topic, 0x7e70)});
  files.push_back({"train_reranking.jsonl",
                   gen_train_retrieval(pools, cfg, "reranking",
                                       cfg.reranking_per_topic, 0x7e71)});
  files.push_back({"train_sts.jsonl",
                   gen_scored(pools, mix_seed(cfg.seed, 0x7e72), "sts",
                              cfg.sts_per_level_per_topic)});
  files.push_back({"train_pair.jsonl", gen_train_pairs(pools, cfg)});
  files.push_back({"train_classification.jsonl",
                   gen_train_labeled(pools, cfg, "classification",
                                     cfg.labeled_per_topic, 0x7e74, false)});
  files.push_back({"train_clustering.jsonl",
                   gen_train_labeled(pools, cfg, "clustering",
                                     cfg.clustering_per_topic, 0x7e75, true)});
  files.push_back({"eval_classification.jsonl",
                   gen_eval_classification(cfg, pools)});
  files.push_back({"eval_clustering.jsonl", gen_eval_clustering(cfg, pools)});
  files.push_back({"eval_pair.jsonl", gen_eval_pairs(cfg, pools)});
  files.push_back({"eval_sts.jsonl", gen_eval_sts(cfg, pools)});
  files.push_back({"eval_retrieval.jsonl", gen_eval_retrieval(cfg, pools)});
  files.push_back({"eval_reranking.jsonl", gen_eval_reranking(cfg, pools)});
  return files;
}

}  // namespace ember
