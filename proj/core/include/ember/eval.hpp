#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ember/encoder.hpp"
#include "ember/losses.hpp"
#include "ember/numerics.hpp"

namespace ember {

struct ClassificationItem {
  std::string text;
  std::string label;
  bool test = false;  // split: train or test
};

struct ClusteringItem {
  std::string text;
  std::string cluster;
};

struct PairItem {
  std::string text_a;
  std::string text_b;
  int label = 0;  // binary
};

struct StsItem {
  std::string text_a;
  std::string text_b;
  double score = 0.0;
};

struct RetrievalEvalData {
  struct Query {
    std::string text;
    std::vector<std::size_t> relevant;  // indices into docs
  };
  std::vector<std::string> docs;
  std::vector<Query> queries;
};

struct RerankItem {
  std::string query;
  std::vector<std::string> candidates;
  std::vector<std::size_t> relevant;  // indices into candidates
};

using EvalData =
    std::variant<std::vector<ClassificationItem>, std::vector<ClusteringItem>,
                 std::vector<PairItem>, std::vector<StsItem>, RetrievalEvalData,
                 std::vector<RerankItem>>;

struct EvalDataset {
  Task task = Task::classification;
  std::string name;
  EvalData data;
};

/// One JSON object per line; schemas by task tag:
///   classification:       {"task","text","label","split":"train"|"test"}
///   clustering:           {"task","text","cluster"}
///   pair_classification:  {"task","text_a","text_b","label":0|1}
///   sts:                  {"task","text_a","text_b","score"}
///   retrieval:            {"task","type":"doc","text"} and
///                         {"task","type":"query","text","relevant":[doc idx]}
///   reranking:            {"task","query","candidates":[...],"relevant":[idx]}
/// The dataset name is the file's basename without extension.
EvalDataset load_eval_jsonl(const std::string& path);

// ---- metric primitives (exposed for oracle tests) ----

/// Seeded k-means on euclidean distance: `restarts` independent runs of at
/// most `iters` Lloyd iterations each, initial centroids drawn from the data
/// points, lowest-inertia run kept. Ties in assignment go to the lowest
/// centroid index.
std::vector<std::size_t> kmeans(const std::vector<Vec>& points, std::size_t k,
                                std::uint64_t seed, std::size_t restarts = 10,
                                std::size_t iters = 100);

/// Harmonic mean of homogeneity and completeness (natural-log entropies).
double v_measure(const std::vector<std::size_t>& gold,
                 const std::vector<std::size_t>& pred);

/// Spearman rank correlation with average ranks for ties. Throws
/// ConstantInput when either side has zero rank variance.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

/// Binary-relevance nDCG@k for one ranked list (1 = relevant).
/// total_relevant is the ideal-DCG pool size; must be >= 1.
double ndcg_at_k(const std::vector<int>& ranked_relevance,
                 std::size_t total_relevant, std::size_t k);

/// Average precision for one ranked list; total_relevant >= 1.
double average_precision(const std::vector<int>& ranked_relevance,
                         std::size_t total_relevant);

// ---- per-task evaluations ----

/// Nearest-centroid accuracy: centroids from normalized train-split
/// embeddings at prefix eval_dim, cosine assignment on the test split.
double eval_classification(const EncoderParams& params,
                           const EncoderConfig& config,
                           const std::vector<ClassificationItem>& items,
                           std::size_t eval_dim);

/// V-measure of seeded k-means (k = gold cluster count) vs gold clusters.
double eval_clustering(const EncoderParams& params, const EncoderConfig& config,
                       const std::vector<ClusteringItem>& items,
                       std::size_t eval_dim, std::uint64_t seed = 0);

/// Accuracy at the best cosine threshold (exhaustive sweep).
double eval_pair(const EncoderParams& params, const EncoderConfig& config,
                 const std::vector<PairItem>& items, std::size_t eval_dim);

/// Mean binary nDCG@k over queries, ranking the corpus by cosine.
double eval_retrieval(const EncoderParams& params, const EncoderConfig& config,
                      const RetrievalEvalData& data, std::size_t eval_dim,
                      std::size_t k = 10);

/// Mean average precision over per-query candidate lists.
double eval_reranking(const EncoderParams& params, const EncoderConfig& config,
                      const std::vector<RerankItem>& items,
                      std::size_t eval_dim);

/// Spearman correlation between pair cosines and gold scores.
double eval_sts(const EncoderParams& params, const EncoderConfig& config,
                const std::vector<StsItem>& items, std::size_t eval_dim);

struct EvalReport {
  struct DatasetScore {
    Task task;
    std::string name;
    double value = 0.0;
  };
  struct TaskScore {
    Task task;
    double value = 0.0;  // mean over that task's datasets
  };
  std::size_t eval_dim = 0;
  std::vector<DatasetScore> dataset_scores;
  std::vector<TaskScore> task_scores;  // in Task enum order, tasks present only
  double average = 0.0;                // mean of task_scores
};

/// Runs every suite at prefix eval_dim, averages within each task, then
/// across the tasks present.
EvalReport eval_all(const EncoderParams& params, const EncoderConfig& config,
                    const std::vector<EvalDataset>& suites,
                    std::size_t eval_dim, std::uint64_t seed = 0);

/// Aligned-column text table, values scaled by 100.
std::string render_report_text(const EvalReport& report);

/// JSON object with raw [0,1] metric values.
std::string render_report_json(const EvalReport& report);

}  // namespace ember
