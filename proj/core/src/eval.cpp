#include "ember/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

using nlohmann::json;

namespace {

[[noreturn]] void line_error(ErrorCode code, const std::string& path,
                             std::size_t line, const std::string& what) {
  throw Error(code, path + ":" + std::to_string(line) + ": " + what);
}

std::string require_str(const json& obj, const char* key,
                        const std::string& path, std::size_t line) {
  if (!obj.contains(key) || !obj[key].is_string())
    line_error(ErrorCode::schema_error, path, line,
               std::string("missing string field \"") + key + "\"");
  return obj[key].get<std::string>();
}

double require_num(const json& obj, const char* key, const std::string& path,
                   std::size_t line) {
  if (!obj.contains(key) || !obj[key].is_number())
    line_error(ErrorCode::schema_error, path, line,
               std::string("missing numeric field \"") + key + "\"");
  return obj[key].get<double>();
}

std::vector<std::size_t> require_index_array(const json& obj, const char* key,
                                             const std::string& path,
                                             std::size_t line) {
  if (!obj.contains(key) || !obj[key].is_array())
    line_error(ErrorCode::schema_error, path, line,
               std::string("missing array field \"") + key + "\"");
  std::vector<std::size_t> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_unsigned())
      line_error(ErrorCode::schema_error, path, line,
                 std::string("\"") + key + "\" must hold non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& path, std::size_t line) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key()))
      line_error(ErrorCode::schema_error, path, line,
                 "unknown field \"" + item.key() + "\"");
  }
}

std::string basename_no_ext(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
  return base;
}

}  // namespace

EvalDataset load_eval_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);

  EvalDataset out;
  out.name = basename_no_ext(path);
  bool task_known = false;

  std::vector<ClassificationItem> cls;
  std::vector<ClusteringItem> clu;
  std::vector<PairItem> pairs;
  std::vector<StsItem> sts;
  RetrievalEvalData retr;
  std::vector<RerankItem> rer;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      line_error(ErrorCode::parse_error, path, line_no, e.what());
    }
    if (!obj.is_object())
      line_error(ErrorCode::schema_error, path, line_no, "line is not a JSON object");
    const Task task = task_from_string(require_str(obj, "task", path, line_no));
    if (!task_known) {
      out.task = task;
      task_known = true;
    } else if (task != out.task) {
      line_error(ErrorCode::schema_error, path, line_no,
                 "mixed task tags in one file");
    }
    switch (task) {
      case Task::classification: {
        reject_unknown(obj, {"task", "text", "label", "split"}, path, line_no);
        ClassificationItem item;
        item.text = require_str(obj, "text", path, line_no);
        item.label = require_str(obj, "label", path, line_no);
        const std::string split = require_str(obj, "split", path, line_no);
        if (split != "train" && split != "test")
          line_error(ErrorCode::schema_error, path, line_no,
                     "split must be \"train\" or \"test\"");
        item.test = split == "test";
        cls.push_back(std::move(item));
        break;
      }
      case Task::clustering: {
        reject_unknown(obj, {"task", "text", "cluster"}, path, line_no);
        clu.push_back({require_str(obj, "text", path, line_no),
                       require_str(obj, "cluster", path, line_no)});
        break;
      }
      case Task::pair_classification: {
        reject_unknown(obj, {"task", "text_a", "text_b", "label"}, path, line_no);
        PairItem item;
        item.text_a = require_str(obj, "text_a", path, line_no);
        item.text_b = require_str(obj, "text_b", path, line_no);
        if (!obj.contains("label") || !obj["label"].is_number_integer())
          line_error(ErrorCode::schema_error, path, line_no,
                     "label must be an integer");
        item.label = obj["label"].get<int>();
        if (item.label != 0 && item.label != 1)
          line_error(ErrorCode::schema_error, path, line_no, "label must be 0 or 1");
        pairs.push_back(std::move(item));
        break;
      }
      case Task::sts: {
        reject_unknown(obj, {"task", "text_a", "text_b", "score"}, path, line_no);
        StsItem item;
        item.text_a = require_str(obj, "text_a", path, line_no);
        item.text_b = require_str(obj, "text_b", path, line_no);
        item.score = require_num(obj, "score", path, line_no);
        sts.push_back(std::move(item));
        break;
      }
      case Task::retrieval: {
        const std::string type = require_str(obj, "type", path, line_no);
        if (type == "doc") {
          reject_unknown(obj, {"task", "type", "text"}, path, line_no);
          retr.docs.push_back(require_str(obj, "text", path, line_no));
        } else if (type == "query") {
          reject_unknown(obj, {"task", "type", "text", "relevant"}, path, line_no);
          RetrievalEvalData::Query q;
          q.text = require_str(obj, "text", path, line_no);
          q.relevant = require_index_array(obj, "relevant", path, line_no);
          retr.queries.push_back(std::move(q));
        } else {
          line_error(ErrorCode::schema_error, path, line_no,
                     "type must be \"doc\" or \"query\"");
        }
        break;
      }
      case Task::reranking: {
        reject_unknown(obj, {"task", "query", "candidates", "relevant"}, path,
                       line_no);
        RerankItem item;
        item.query = require_str(obj, "query", path, line_no);
        if (!obj.contains("candidates") || !obj["candidates"].is_array() ||
            obj["candidates"].empty())
          line_error(ErrorCode::schema_error, path, line_no,
                     "candidates must be a non-empty array");
        for (const auto& c : obj["candidates"]) {
          if (!c.is_string())
            line_error(ErrorCode::schema_error, path, line_no,
                       "candidates must hold strings");
          item.candidates.push_back(c.get<std::string>());
        }
        item.relevant = require_index_array(obj, "relevant", path, line_no);
        for (std::size_t idx : item.relevant)
          if (idx >= item.candidates.size())
            line_error(ErrorCode::schema_error, path, line_no,
                       "relevant index out of range");
        rer.push_back(std::move(item));
        break;
      }
    }
  }
  if (!task_known) throw Error(ErrorCode::empty_dataset, path + " has no records");

  switch (out.task) {
    case Task::classification: out.data = std::move(cls); break;
    case Task::clustering: out.data = std::move(clu); break;
    case Task::pair_classification: out.data = std::move(pairs); break;
    case Task::sts: out.data = std::move(sts); break;
    case Task::retrieval: {
      if (retr.docs.empty())
        throw Error(ErrorCode::schema_error, path + ": no doc rows");
      if (retr.queries.empty())
        throw Error(ErrorCode::schema_error, path + ": no query rows");
      for (const auto& q : retr.queries)
        for (std::size_t idx : q.relevant)
          if (idx >= retr.docs.size())
            throw Error(ErrorCode::schema_error,
                        path + ": relevant index out of range");
      out.data = std::move(retr);
      break;
    }
    case Task::reranking: out.data = std::move(rer); break;
  }
  return out;
}

// ---- metric primitives ----

namespace {

double sqdist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Vec normalized(const Vec& v) {
  const double n = norm(v);
  if (n < 1e-12) return v;
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

/// Indices sorted by descending score, ascending index on ties.
std::vector<std::size_t> rank_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

double entropy(const std::vector<std::size_t>& counts, double n) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

std::vector<std::size_t> kmeans(const std::vector<Vec>& points, std::size_t k,
                                std::uint64_t seed, std::size_t restarts,
                                std::size_t iters) {
  const std::size_t n = points.size();
  if (n == 0) throw Error(ErrorCode::empty_input, "no points");
  if (k == 0 || k > n)
    throw Error(ErrorCode::degenerate_clusters,
                "k must be in [1, point count]");
  const std::size_t dim = points[0].size();
  for (const Vec& p : points)
    if (p.size() != dim)
      throw Error(ErrorCode::length_mismatch, "points of unequal dimension");
  if (restarts == 0 || iters == 0)
    throw Error(ErrorCode::config_error, "restarts and iters must be >= 1");

  std::vector<std::size_t> best_assign(n, 0);
  double best_inertia = std::numeric_limits<double>::infinity();

  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(mix_seed(seed, 0xc1a5 + r));
    std::vector<Vec> centroids;
    for (std::size_t idx : sample_without_replacement(n, k, rng))
      centroids.push_back(points[idx]);
    std::vector<std::size_t> assign(n, 0);

    for (std::size_t it = 0; it < iters; ++it) {
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t arg = 0;
        double best = sqdist(points[i], centroids[0]);
        for (std::size_t c = 1; c < k; ++c) {
          const double d = sqdist(points[i], centroids[c]);
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        if (arg != assign[i]) changed = true;
        assign[i] = arg;
      }
      if (!changed && it > 0) break;
      std::vector<Vec> sums(k, Vec(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[assign[i]];
        for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += points[i][j];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;  // empty cluster keeps its centroid
        for (std::size_t j = 0; j < dim; ++j)
          centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += sqdist(points[i], centroids[assign[i]]);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assign = assign;
    }
  }
  return best_assign;
}

double v_measure(const std::vector<std::size_t>& gold,
                 const std::vector<std::size_t>& pred) {
  if (gold.size() != pred.size())
    throw Error(ErrorCode::length_mismatch, "gold/pred sizes differ");
  if (gold.empty()) throw Error(ErrorCode::empty_input, "no assignments");
  const double n = static_cast<double>(gold.size());

  const std::size_t n_gold = 1 + *std::max_element(gold.begin(), gold.end());
  const std::size_t n_pred = 1 + *std::max_element(pred.begin(), pred.end());
  std::vector<std::size_t> gold_counts(n_gold, 0), pred_counts(n_pred, 0);
  std::vector<std::vector<std::size_t>> joint(n_gold,
                                              std::vector<std::size_t>(n_pred, 0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++gold_counts[gold[i]];
    ++pred_counts[pred[i]];
    ++joint[gold[i]][pred[i]];
  }

  const double h_gold = entropy(gold_counts, n);
  const double h_pred = entropy(pred_counts, n);
  double h_gold_given_pred = 0.0, h_pred_given_gold = 0.0;
  for (std::size_t c = 0; c < n_gold; ++c) {
    for (std::size_t p = 0; p < n_pred; ++p) {
      if (joint[c][p] == 0) continue;
      const double pj = static_cast<double>(joint[c][p]) / n;
      h_gold_given_pred -=
          pj * std::log(static_cast<double>(joint[c][p]) /
                        static_cast<double>(pred_counts[p]));
      h_pred_given_gold -=
          pj * std::log(static_cast<double>(joint[c][p]) /
                        static_cast<double>(gold_counts[c]));
    }
  }
  const double homogeneity = h_gold == 0.0 ? 1.0 : 1.0 - h_gold_given_pred / h_gold;
  const double completeness = h_pred == 0.0 ? 1.0 : 1.0 - h_pred_given_gold / h_pred;
  if (homogeneity + completeness == 0.0) return 0.0;
  return 2.0 * homogeneity * completeness / (homogeneity + completeness);
}

namespace {

/// 1-based average ranks with tie handling.
std::vector<double> ranks_of(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw Error(ErrorCode::length_mismatch, "xs/ys sizes differ");
  if (xs.size() < 2)
    throw Error(ErrorCode::constant_input, "need at least 2 observations");
  const std::vector<double> rx = ranks_of(xs);
  const std::vector<double> ry = ranks_of(ys);
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error(ErrorCode::constant_input, "zero rank variance");
  return sxy / std::sqrt(sxx * syy);
}

double ndcg_at_k(const std::vector<int>& ranked_relevance,
                 std::size_t total_relevant, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::config_error, "k must be >= 1");
  if (total_relevant == 0)
    throw Error(ErrorCode::no_relevant_docs, "no relevant documents");
  double dcg = 0.0;
  const std::size_t upto = std::min(k, ranked_relevance.size());
  for (std::size_t i = 0; i < upto; ++i)
    if (ranked_relevance[i])
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, total_relevant);
  for (std::size_t i = 0; i < ideal; ++i)
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

double average_precision(const std::vector<int>& ranked_relevance,
                         std::size_t total_relevant) {
  if (total_relevant == 0)
    throw Error(ErrorCode::no_relevant_docs, "no relevant documents");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked_relevance.size(); ++i) {
    if (!ranked_relevance[i]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(total_relevant);
}

// ---- per-task evaluations ----

namespace {

void validate_eval_dim(const EncoderConfig& config, std::size_t eval_dim) {
  if (eval_dim == 0 || eval_dim > config.out_dim)
    throw Error(ErrorCode::dim_out_of_range,
                "eval_dim " + std::to_string(eval_dim) + " not in [1, " +
                    std::to_string(config.out_dim) + "]");
}

Vec embed_at(const std::string& text, const EncoderParams& params,
             const EncoderConfig& config, std::size_t dim) {
  Vec full = embed_text(text, params, config);
  full.resize(dim);
  return full;
}

}  // namespace

double eval_classification(const EncoderParams& params,
                           const EncoderConfig& config,
                           const std::vector<ClassificationItem>& items,
                           std::size_t eval_dim) {
  validate_eval_dim(config, eval_dim);
  std::map<std::string, Vec> centroid_sums;
  std::map<std::string, std::size_t> centroid_counts;
  std::size_t n_train = 0, n_test = 0;
  for (const ClassificationItem& item : items) {
    if (item.test) {
      ++n_test;
      continue;
    }
    ++n_train;
    const Vec e = normalized(embed_at(item.text, params, config, eval_dim));
    auto [it, fresh] = centroid_sums.try_emplace(item.label, Vec(eval_dim, 0.0));
    for (std::size_t j = 0; j < eval_dim; ++j) it->second[j] += e[j];
    ++centroid_counts[item.label];
  }
  if (n_train == 0 || n_test == 0)
    throw Error(ErrorCode::missing_split, "need non-empty train and test splits");

  std::vector<std::pair<std::string, Vec>> centroids;
  for (auto& [label, sum] : centroid_sums) {
    Vec c = sum;
    for (double& v : c) v /= static_cast<double>(centroid_counts[label]);
    centroids.emplace_back(label, std::move(c));
  }

  std::size_t correct = 0;
  for (const ClassificationItem& item : items) {
    if (!item.test) continue;
    const Vec e = embed_at(item.text, params, config, eval_dim);
    std::string best_label = centroids.front().first;
    double best = -2.0;
    for (const auto& [label, centroid] : centroids) {
      if (norm(centroid) < 1e-12 || norm(e) < 1e-12) continue;
      const double score = cosine(e, centroid);
      if (score > best) {
        best = score;
        best_label = label;
      }
    }
    if (best_label == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n_test);
}

double eval_clustering(const EncoderParams& params, const EncoderConfig& config,
                       const std::vector<ClusteringItem>& items,
                       std::size_t eval_dim, std::uint64_t seed) {
  validate_eval_dim(config, eval_dim);
  if (items.empty()) throw Error(ErrorCode::empty_dataset, "no clustering items");
  std::map<std::string, std::size_t> cluster_ids;
  std::vector<std::size_t> gold;
  std::vector<Vec> points;
  for (const ClusteringItem& item : items) {
    auto [it, fresh] = cluster_ids.try_emplace(item.cluster, cluster_ids.size());
    gold.push_back(it->second);
    points.push_back(normalized(embed_at(item.text, params, config, eval_dim)));
  }
  if (cluster_ids.size() < 2)
    throw Error(ErrorCode::degenerate_clusters, "need at least 2 gold clusters");
  const std::vector<std::size_t> pred = kmeans(points, cluster_ids.size(), seed);
  return v_measure(gold, pred);
}

double eval_pair(const EncoderParams& params, const EncoderConfig& config,
                 const std::vector<PairItem>& items, std::size_t eval_dim) {
  validate_eval_dim(config, eval_dim);
  if (items.empty()) throw Error(ErrorCode::empty_dataset, "no pairs");
  bool any_pos = false, any_neg = false;
  std::vector<double> cosines;
  for (const PairItem& item : items) {
    (item.label ? any_pos : any_neg) = true;
    cosines.push_back(cosine(embed_at(item.text_a, params, config, eval_dim),
                             embed_at(item.text_b, params, config, eval_dim)));
  }
  if (!any_pos || !any_neg)
    throw Error(ErrorCode::single_class, "pair labels are all identical");

  std::vector<double> thresholds = cosines;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.push_back(thresholds.back() + 1.0);  // "predict none positive"

  std::size_t best = 0;
  for (double t : thresholds) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const int predicted = cosines[i] >= t ? 1 : 0;
      if (predicted == items[i].label) ++correct;
    }
    best = std::max(best, correct);
  }
  return static_cast<double>(best) / static_cast<double>(items.size());
}

double eval_retrieval(const EncoderParams& params, const EncoderConfig& config,
                      const RetrievalEvalData& data, std::size_t eval_dim,
                      std::size_t k) {
  validate_eval_dim(config, eval_dim);
  if (data.docs.empty() || data.queries.empty())
    throw Error(ErrorCode::empty_dataset, "need docs and queries");
  std::vector<Vec> doc_embs;
  doc_embs.reserve(data.docs.size());
  for (const std::string& doc : data.docs)
    doc_embs.push_back(embed_at(doc, params, config, eval_dim));

  double total = 0.0;
  for (const auto& query : data.queries) {
    if (query.relevant.empty())
      throw Error(ErrorCode::no_relevant_docs, "query has no relevant docs");
    for (std::size_t idx : query.relevant)
      if (idx >= data.docs.size())
        throw Error(ErrorCode::schema_error, "relevant index out of range");
    const Vec q = embed_at(query.text, params, config, eval_dim);
    std::vector<double> scores(doc_embs.size());
    for (std::size_t d = 0; d < doc_embs.size(); ++d)
      scores[d] = cosine(q, doc_embs[d]);
    const std::vector<std::size_t> order = rank_desc(scores);
    const std::set<std::size_t> rel(query.relevant.begin(), query.relevant.end());
    std::vector<int> flags(order.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i)
      flags[i] = rel.count(order[i]) ? 1 : 0;
    total += ndcg_at_k(flags, rel.size(), k);
  }
  return total / static_cast<double>(data.queries.size());
}

double eval_reranking(const EncoderParams& params, const EncoderConfig& config,
                      const std::vector<RerankItem>& items,
                      std::size_t eval_dim) {
  validate_eval_dim(config, eval_dim);
  if (items.empty()) throw Error(ErrorCode::empty_dataset, "no reranking items");
  double total = 0.0;
  for (const RerankItem& item : items) {
    if (item.relevant.empty())
      throw Error(ErrorCode::no_relevant_docs, "query has no relevant candidates");
    const Vec q = embed_at(item.query, params, config, eval_dim);
    std::vector<double> scores(item.candidates.size());
    for (std::size_t c = 0; c < item.candidates.size(); ++c)
      scores[c] = cosine(q, embed_at(item.candidates[c], params, config, eval_dim));
    const std::vector<std::size_t> order = rank_desc(scores);
    const std::set<std::size_t> rel(item.relevant.begin(), item.relevant.end());
    std::vector<int> flags(order.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i)
      flags[i] = rel.count(order[i]) ? 1 : 0;
    total += average_precision(flags, rel.size());
  }
  return total / static_cast<double>(items.size());
}

double eval_sts(const EncoderParams& params, const EncoderConfig& config,
                const std::vector<StsItem>& items, std::size_t eval_dim) {
  validate_eval_dim(config, eval_dim);
  if (items.size() < 2)
    throw Error(ErrorCode::constant_input, "need at least 2 pairs");
  std::vector<double> cosines, scores;
  for (const StsItem& item : items) {
    cosines.push_back(cosine(embed_at(item.text_a, params, config, eval_dim),
                             embed_at(item.text_b, params, config, eval_dim)));
    scores.push_back(item.score);
  }
  return spearman(cosines, scores);
}

EvalReport eval_all(const EncoderParams& params, const EncoderConfig& config,
                    const std::vector<EvalDataset>& suites,
                    std::size_t eval_dim, std::uint64_t seed) {
  validate_eval_dim(config, eval_dim);
  if (suites.empty()) throw Error(ErrorCode::empty_dataset, "no eval suites");

  EvalReport report;
  report.eval_dim = eval_dim;
  std::map<Task, std::vector<double>> by_task;
  for (const EvalDataset& suite : suites) {
    double value = 0.0;
    switch (suite.task) {
      case Task::classification:
        value = eval_classification(
            params, config, std::get<std::vector<ClassificationItem>>(suite.data),
            eval_dim);
        break;
      case Task::clustering:
        value = eval_clustering(params, config,
                                std::get<std::vector<ClusteringItem>>(suite.data),
                                eval_dim, seed);
        break;
      case Task::pair_classification:
        value = eval_pair(params, config,
                          std::get<std::vector<PairItem>>(suite.data), eval_dim);
        break;
      case Task::sts:
        value = eval_sts(params, config,
                         std::get<std::vector<StsItem>>(suite.data), eval_dim);
        break;
      case Task::retrieval:
        value = eval_retrieval(params, config,
                               std::get<RetrievalEvalData>(suite.data), eval_dim);
        break;
      case Task::reranking:
        value = eval_reranking(params, config,
                               std::get<std::vector<RerankItem>>(suite.data),
                               eval_dim);
        break;
    }
    report.dataset_scores.push_back({suite.task, suite.name, value});
    by_task[suite.task].push_back(value);
  }

  double sum = 0.0;
  for (const auto& [task, values] : by_task) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    report.task_scores.push_back({task, mean});
    sum += mean;
  }
  report.average = sum / static_cast<double>(by_task.size());
  return report;
}

std::string render_report_text(const EvalReport& report) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof(buf), "eval_dim %zu\n", report.eval_dim);
  out += buf;
  for (const auto& ds : report.dataset_scores) {
    std::snprintf(buf, sizeof(buf), "  %-24s %-20s %6.2f\n", ds.name.c_str(),
                  task_name(ds.task), 100.0 * ds.value);
    out += buf;
  }
  out += "  ----\n";
  for (const auto& ts : report.task_scores) {
    std::snprintf(buf, sizeof(buf), "  %-24s %-20s %6.2f\n", "task avg",
                  task_name(ts.task), 100.0 * ts.value);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "  %-45s %6.2f\n", "average", 100.0 * report.average);
  out += buf;
  return out;
}

std::string render_report_json(const EvalReport& report) {
  json tasks = json::object();
  for (const auto& ts : report.task_scores) tasks[task_name(ts.task)] = ts.value;
  json datasets = json::array();
  for (const auto& ds : report.dataset_scores)
    datasets.push_back(json{{"name", ds.name},
                            {"task", task_name(ds.task)},
                            {"value", ds.value}});
  return json{{"eval_dim", report.eval_dim},
              {"datasets", datasets},
              {"tasks", tasks},
              {"average", report.average}}
      .dump(2);
}

}  // namespace ember
