#include "ember/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::schema_error,
              "line " + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* field, std::size_t line) {
  if (!obj.contains(field)) schema_fail(line, std::string("missing field \"") + field + "\"");
  const auto& v = obj.at(field);
  if (!v.is_string()) schema_fail(line, std::string("field \"") + field + "\" must be a string");
  std::string s = v.get<std::string>();
  if (s.empty()) schema_fail(line, std::string("field \"") + field + "\" must be non-empty");
  return s;
}

std::vector<std::string> require_string_array(const json& obj, const char* field,
                                              std::size_t line, bool non_empty) {
  if (!obj.contains(field)) schema_fail(line, std::string("missing field \"") + field + "\"");
  const auto& v = obj.at(field);
  if (!v.is_array()) schema_fail(line, std::string("field \"") + field + "\" must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string() || e.get<std::string>().empty()) {
      schema_fail(line, std::string("field \"") + field + "\" must hold non-empty strings");
    }
    out.push_back(e.get<std::string>());
  }
  if (non_empty && out.empty()) {
    schema_fail(line, std::string("field \"") + field + "\" must be non-empty");
  }
  return out;
}

double require_number(const json& obj, const char* field, std::size_t line) {
  if (!obj.contains(field)) schema_fail(line, std::string("missing field \"") + field + "\"");
  const auto& v = obj.at(field);
  if (!v.is_number()) schema_fail(line, std::string("field \"") + field + "\" must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) schema_fail(line, std::string("field \"") + field + "\" must be finite");
  return d;
}

void reject_unknown_fields(const json& obj, const std::set<std::string>& allowed,
                           std::size_t line) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) schema_fail(line, "unknown field \"" + key + "\"");
  }
}

TrainExample parse_example(Task task, const json& obj, std::size_t line) {
  switch (task) {
    case Task::retrieval:
    case Task::reranking: {
      reject_unknown_fields(obj, {"task", "query", "pos", "neg"}, line);
      RetrievalExample ex;
      ex.query = require_string(obj, "query", line);
      ex.pos = require_string_array(obj, "pos", line, /*non_empty=*/true);
      ex.neg = require_string_array(obj, "neg", line, /*non_empty=*/false);
      return ex;
    }
    case Task::sts:
    case Task::pair_classification: {
      reject_unknown_fields(obj, {"task", "text_a", "text_b", "score"}, line);
      ScoredExample ex;
      ex.text_a = require_string(obj, "text_a", line);
      ex.text_b = require_string(obj, "text_b", line);
      ex.score = require_number(obj, "score", line);
      return ex;
    }
    case Task::classification:
    case Task::clustering: {
      reject_unknown_fields(obj, {"task", "text", "pos_label", "neg_labels"}, line);
      LabeledExample ex;
      ex.text = require_string(obj, "text", line);
      ex.pos_label = require_string(obj, "pos_label", line);
      ex.neg_labels = require_string_array(obj, "neg_labels", line, /*non_empty=*/true);
      return ex;
    }
  }
  schema_fail(line, "unhandled task");
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

TaskDataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot open " + path);
  }
  TaskDataset dataset;
  bool have_task = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(lineno) + ": expected a JSON object");
    }
    const Task task = task_from_string(require_string(obj, "task", lineno));
    if (!have_task) {
      dataset.task = task;
      have_task = true;
    } else if (task != dataset.task) {
      schema_fail(lineno, std::string("task \"") + task_name(task) +
                              "\" in a \"" + task_name(dataset.task) + "\" file");
    }
    dataset.examples.push_back(parse_example(task, obj, lineno));
  }
  if (dataset.examples.empty()) {
    throw Error(ErrorCode::empty_dataset, path + " holds no examples");
  }
  return dataset;
}

std::string to_jsonl_line(Task task, const TrainExample& example) {
  json obj;
  obj["task"] = task_name(task);
  if (const auto* r = std::get_if<RetrievalExample>(&example)) {
    obj["query"] = r->query;
    obj["pos"] = r->pos;
    obj["neg"] = r->neg;
  } else if (const auto* s = std::get_if<ScoredExample>(&example)) {
    obj["text_a"] = s->text_a;
    obj["text_b"] = s->text_b;
    obj["score"] = s->score;
  } else if (const auto* l = std::get_if<LabeledExample>(&example)) {
    obj["text"] = l->text;
    obj["pos_label"] = l->pos_label;
    obj["neg_labels"] = l->neg_labels;
  }
  return obj.dump();
}

std::vector<LabeledExample> reformat_labeled(
    const std::vector<std::pair<std::string, std::string>>& texts,
    const std::vector<std::string>& label_set) {
  if (label_set.size() < 2) {
    throw Error(ErrorCode::degenerate_label_set,
                "need at least 2 labels, got " + std::to_string(label_set.size()));
  }
  std::vector<LabeledExample> out;
  out.reserve(texts.size());
  for (const auto& [text, label] : texts) {
    if (std::find(label_set.begin(), label_set.end(), label) == label_set.end()) {
      throw Error(ErrorCode::unknown_label, "label \"" + label + "\" not in label set");
    }
    LabeledExample ex;
    ex.text = text;
    ex.pos_label = label;
    for (const std::string& l : label_set) {
      if (l != label) ex.neg_labels.push_back(l);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

BatchPlan plan_batches(const std::vector<TaskDataset>& datasets,
                       std::size_t batch_size, std::uint64_t seed) {
  if (batch_size < 2) {
    throw Error(ErrorCode::batch_too_small, "batch_size must be >= 2");
  }
  for (const TaskDataset& d : datasets) {
    if (d.examples.empty()) {
      throw Error(ErrorCode::empty_dataset, "plan_batches: empty dataset");
    }
  }

  BatchPlan plan;
  plan.batch_size = batch_size;
  plan.seed = seed;

  // Per-dataset shuffle and chunking, then a proportional merge: batch i of
  // k_t gets sort key (i + 0.5)/k_t so no task's batches bunch together.
  struct Keyed {
    double key;
    std::size_t dataset;
    BatchPlan::Entry entry;
  };
  std::vector<Keyed> keyed;
  for (std::size_t t = 0; t < datasets.size(); ++t) {
    const std::size_t n = datasets[t].examples.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, t));
    shuffle(order, rng);

    std::vector<std::vector<std::size_t>> chunks;
    for (std::size_t b = 0; b < n; b += batch_size) {
      const std::size_t end = std::min(n, b + batch_size);
      if (end - b < 2) break;  // singleton tail dropped
      chunks.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                          order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      Keyed k;
      k.key = (static_cast<double>(i) + 0.5) / static_cast<double>(chunks.size());
      k.dataset = t;
      k.entry = BatchPlan::Entry{datasets[t].task, t, std::move(chunks[i])};
      keyed.push_back(std::move(k));
    }
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.dataset < b.dataset;
  });
  for (Keyed& k : keyed) plan.schedule.push_back(std::move(k.entry));
  return plan;
}

}  // namespace ember
