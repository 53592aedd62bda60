#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ember {

/// Synthetic multi-task suite: a small world of word topics rendered into
/// every training and evaluation schema the toolkit consumes. Each topic
/// owns disjoint word pools per role (query side, document side, labeled-task
/// sides A/B, label names), so surface n-gram overlap carries no cross-pool
/// signal and every evaluation measures alignment the training stage had to
/// learn. Scored pairs are graded by the in-topic fraction of the right-hand
/// text; labeled tasks tie their two text sides together only through the
/// shared label.
struct ToyConfig {
  std::uint64_t seed = 7;
  std::size_t retrieval_per_topic = 20;
  std::size_t reranking_per_topic = 10;
  std::size_t sts_per_level_per_topic = 5;   // 4 levels
  std::size_t pairs_per_topic = 20;          // half positive
  std::size_t labeled_per_topic = 20;        // classification
  std::size_t clustering_per_topic = 12;
  // eval sizes
  std::size_t eval_cls_train_per_topic = 6;
  std::size_t eval_cls_test_per_topic = 4;
  std::size_t eval_clu_per_topic = 8;
  std::size_t eval_docs_per_topic = 10;
  std::size_t eval_queries_per_topic = 3;
  std::size_t eval_sts_per_level_per_topic = 2;
  std::size_t eval_pairs_per_topic = 5;      // rounded up to even
  std::size_t eval_rerank_per_topic = 3;
};

struct GeneratedFile {
  std::string name;   // e.g. "train_retrieval.jsonl"
  std::string jsonl;  // full file content
};

/// Twelve JSONL files: train_{retrieval,reranking,sts,pair,classification,
/// clustering} and eval_{...} with the matching evaluation schemas.
std::vector<GeneratedFile> generate_toy_suite(const ToyConfig& config);

}  // namespace ember
