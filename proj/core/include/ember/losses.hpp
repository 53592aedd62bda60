#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ember/numerics.hpp"

namespace ember {

enum class Task {
  retrieval,
  reranking,
  sts,
  pair_classification,
  classification,
  clustering,
};

Task task_from_string(const std::string& name);
const char* task_name(Task task);

struct LossConfig {
  double tau_retrieval = 0.05;
  double tau_sts = 0.05;
  double tau_cls = 0.05;
};

/// One query per row, its positive, and zero or more hard negatives.
struct RetrievalBatch {
  std::vector<Vec> queries;
  std::vector<Vec> positives;
  std::vector<std::vector<Vec>> hard_negatives;
};

/// Text pairs with fine-grained gold scores.
struct ScoredPairBatch {
  std::vector<Vec> lefts;
  std::vector<Vec> rights;
  std::vector<double> scores;
};

/// One text per row with its target-label embedding as the positive and the
/// remaining label embeddings as that row's only negatives.
struct LabeledBatch {
  std::vector<Vec> texts;
  std::vector<Vec> pos_labels;
  std::vector<std::vector<Vec>> neg_labels;
};

using LossBatch = std::variant<RetrievalBatch, ScoredPairBatch, LabeledBatch>;

/// Scalar loss value plus the gradient with respect to every input embedding.
/// grads[i] aligns with the canonical flatten order of the batch (see
/// flatten()): queries then positives then hard negatives row-major for
/// retrieval batches; lefts then rights for scored pairs; texts then
/// positive labels then negative labels row-major for labeled batches.
struct LossOutput {
  double value = 0.0;
  std::vector<Vec> grads;
};

std::vector<const Vec*> flatten(const RetrievalBatch& batch);
std::vector<const Vec*> flatten(const ScoredPairBatch& batch);
std::vector<const Vec*> flatten(const LabeledBatch& batch);
std::vector<const Vec*> flatten(const LossBatch& batch);

/// Softmax contrastive loss over cosine similarity: for each row the
/// positive competes against that row's hard negatives and, when
/// use_in_batch is set, against every other row's positive and hard
/// negatives. value = -(1/n) sum_i [s(q_i,d_i+)/tau - LSE(row logits)].
LossOutput info_nce(const RetrievalBatch& batch, double tau,
                    bool use_in_batch = true);

/// Ranking loss over pair-of-pairs: value = ln(1 + sum over ordered tuples
/// with score(i) > score(j) of exp((cos_j - cos_i)/tau)). Ties contribute
/// nothing; only the order of the gold scores matters.
LossOutput cosent(const ScoredPairBatch& batch, double tau);

/// Per-row softmax against the row's own label negatives only; other rows
/// are never consulted.
LossOutput label_nce(const LabeledBatch& batch, double tau);

/// Task-based routing: retrieval/reranking -> info_nce with in-batch
/// negatives, sts/pair_classification -> cosent, classification/clustering
/// -> label_nce. Throws TaskBatchMismatch when the batch variant does not
/// match the task.
LossOutput hybrid_loss(Task task, const LossBatch& batch,
                       const LossConfig& config);

}  // namespace ember
