#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ember/losses.hpp"

namespace ember {

struct RetrievalExample {
  std::string query;
  std::vector<std::string> pos;  // non-empty
  std::vector<std::string> neg;  // may be empty
};

struct ScoredExample {
  std::string text_a;
  std::string text_b;
  double score = 0.0;
};

struct LabeledExample {
  std::string text;
  std::string pos_label;
  std::vector<std::string> neg_labels;  // non-empty
};

using TrainExample = std::variant<RetrievalExample, ScoredExample, LabeledExample>;

/// A task-homogeneous, non-empty list of training examples.
struct TaskDataset {
  Task task = Task::retrieval;
  std::vector<TrainExample> examples;
};

/// One epoch of single-task batches: (task, example indices into that
/// task's dataset), interleaved across tasks proportionally to dataset
/// sizes, deterministic under the seed.
struct BatchPlan {
  struct Entry {
    Task task;
    std::size_t dataset_index;  // which TaskDataset the indices refer to
    std::vector<std::size_t> indices;
  };
  std::vector<Entry> schedule;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
};

/// Parses one JSON object per line. Schemas by task tag:
///   retrieval/reranking:        {"task", "query", "pos": [...], "neg": [...]}
///   sts/pair_classification:    {"task", "text_a", "text_b", "score"}
///   classification/clustering:  {"task", "text", "pos_label", "neg_labels"}
/// Unknown fields are rejected; errors carry 1-based line numbers.
TaskDataset load_jsonl(const std::string& path);

/// Serializes retrieval examples back to the JSONL schema above.
std::string to_jsonl_line(Task task, const TrainExample& example);

/// One Labeled example per input: pos_label = its own label, neg_labels =
/// label_set minus that label in original order. Requires |label_set| >= 2
/// and every input label to be a member of label_set.
std::vector<LabeledExample> reformat_labeled(
    const std::vector<std::pair<std::string, std::string>>& texts,
    const std::vector<std::string>& label_set);

/// Shuffles each dataset with the seed, chunks into single-task batches
/// (partial tail kept when >= 2 examples, dropped otherwise) and interleaves
/// batches proportionally to dataset sizes. batch_size must be >= 2.
BatchPlan plan_batches(const std::vector<TaskDataset>& datasets,
                       std::size_t batch_size, std::uint64_t seed);

}  // namespace ember
