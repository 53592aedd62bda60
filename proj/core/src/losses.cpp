#include "ember/losses.hpp"

#include <cmath>
#include <string>

#include "ember/errors.hpp"

namespace ember {

Task task_from_string(const std::string& name) {
  if (name == "retrieval") return Task::retrieval;
  if (name == "reranking") return Task::reranking;
  if (name == "sts") return Task::sts;
  if (name == "pair_classification") return Task::pair_classification;
  if (name == "classification") return Task::classification;
  if (name == "clustering") return Task::clustering;
  throw Error(ErrorCode::schema_error, "unknown task: " + name);
}

const char* task_name(Task task) {
  switch (task) {
    case Task::retrieval: return "retrieval";
    case Task::reranking: return "reranking";
    case Task::sts: return "sts";
    case Task::pair_classification: return "pair_classification";
    case Task::classification: return "classification";
    case Task::clustering: return "clustering";
  }
  return "?";
}

std::vector<const Vec*> flatten(const RetrievalBatch& batch) {
  std::vector<const Vec*> out;
  for (const Vec& q : batch.queries) out.push_back(&q);
  for (const Vec& p : batch.positives) out.push_back(&p);
  for (const auto& row : batch.hard_negatives)
    for (const Vec& n : row) out.push_back(&n);
  return out;
}

std::vector<const Vec*> flatten(const ScoredPairBatch& batch) {
  std::vector<const Vec*> out;
  for (const Vec& a : batch.lefts) out.push_back(&a);
  for (const Vec& b : batch.rights) out.push_back(&b);
  return out;
}

std::vector<const Vec*> flatten(const LabeledBatch& batch) {
  std::vector<const Vec*> out;
  for (const Vec& t : batch.texts) out.push_back(&t);
  for (const Vec& p : batch.pos_labels) out.push_back(&p);
  for (const auto& row : batch.neg_labels)
    for (const Vec& n : row) out.push_back(&n);
  return out;
}

std::vector<const Vec*> flatten(const LossBatch& batch) {
  return std::visit([](const auto& b) { return flatten(b); }, batch);
}

namespace {

void require_tau(double tau) {
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::config_error, "temperature must be > 0");
  }
}

std::vector<Vec> zero_grads_like(const std::vector<const Vec*>& views) {
  std::vector<Vec> grads;
  grads.reserve(views.size());
  for (const Vec* v : views) grads.emplace_back(v->size(), 0.0);
  return grads;
}

void axpy(Vec& acc, double scale, const Vec& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += scale * v[i];
}

// Shared core of info_nce and label_nce: per anchor row, a softmax over
// the positive plus a candidate negative set. `candidates[i]` lists flat
// indices of row i's competitors; the positive's flat index comes first.
struct SoftmaxRows {
  double value = 0.0;
  std::vector<Vec> grads;
};

SoftmaxRows nce_rows(const std::vector<const Vec*>& views,
                     const std::vector<const Vec*>& anchors,
                     const std::vector<std::size_t>& anchor_flat,
                     const std::vector<std::vector<std::size_t>>& candidates,
                     double tau) {
  const std::size_t n = anchors.size();
  SoftmaxRows out;
  out.grads = zero_grads_like(views);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& anchor = *anchors[i];
    const auto& cand = candidates[i];
    Vec logits(cand.size());
    for (std::size_t c = 0; c < cand.size(); ++c) {
      logits[c] = cosine(anchor, *views[cand[c]]) / tau;
    }
    const double lse = log_sum_exp(logits);
    total += lse - logits[0];

    // dL/dlogit_c = (softmax_c - [c is the positive]) / n
    for (std::size_t c = 0; c < cand.size(); ++c) {
      double gz = std::exp(logits[c] - lse) - (c == 0 ? 1.0 : 0.0);
      gz /= static_cast<double>(n);
      if (gz == 0.0) continue;
      const Vec& doc = *views[cand[c]];
      axpy(out.grads[anchor_flat[i]], gz / tau, cosine_grad_a(anchor, doc));
      axpy(out.grads[cand[c]], gz / tau, cosine_grad_a(doc, anchor));
    }
  }
  out.value = total / static_cast<double>(n);
  return out;
}

}  // namespace

LossOutput info_nce(const RetrievalBatch& batch, double tau, bool use_in_batch) {
  require_tau(tau);
  const std::size_t n = batch.queries.size();
  if (n == 0) throw Error(ErrorCode::empty_batch, "info_nce: empty batch");
  if (batch.positives.size() != n || batch.hard_negatives.size() != n) {
    throw Error(ErrorCode::length_mismatch, "info_nce: misaligned batch rows");
  }

  const std::vector<const Vec*> views = flatten(batch);
  // Flat layout: queries [0,n), positives [n,2n), then negatives row-major.
  std::vector<std::size_t> neg_base(n);
  std::size_t offset = 2 * n;
  for (std::size_t i = 0; i < n; ++i) {
    neg_base[i] = offset;
    offset += batch.hard_negatives[i].size();
  }

  std::vector<const Vec*> anchors(n);
  std::vector<std::size_t> anchor_flat(n);
  std::vector<std::vector<std::size_t>> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    anchors[i] = &batch.queries[i];
    anchor_flat[i] = i;
    auto& cand = candidates[i];
    cand.push_back(n + i);  // own positive first
    for (std::size_t k = 0; k < batch.hard_negatives[i].size(); ++k) {
      cand.push_back(neg_base[i] + k);
    }
    if (use_in_batch) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        cand.push_back(n + j);
        for (std::size_t k = 0; k < batch.hard_negatives[j].size(); ++k) {
          cand.push_back(neg_base[j] + k);
        }
      }
    }
  }

  SoftmaxRows rows = nce_rows(views, anchors, anchor_flat, candidates, tau);
  return LossOutput{rows.value, std::move(rows.grads)};
}

LossOutput cosent(const ScoredPairBatch& batch, double tau) {
  require_tau(tau);
  const std::size_t m = batch.lefts.size();
  if (m == 0) throw Error(ErrorCode::empty_batch, "cosent: empty batch");
  if (batch.rights.size() != m || batch.scores.size() != m) {
    throw Error(ErrorCode::length_mismatch, "cosent: misaligned batch rows");
  }

  Vec cos(m);
  for (std::size_t k = 0; k < m; ++k) {
    cos[k] = cosine(batch.lefts[k], batch.rights[k]);
  }

  // Ordered tuples (hi, lo) with a strictly greater gold score; the
  // violation logit is (cos_lo - cos_hi)/tau. An appended 0 logit folds the
  // "+1" inside the log into one stable log-sum-exp.
  std::vector<std::pair<std::size_t, std::size_t>> tuples;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (batch.scores[a] > batch.scores[b]) tuples.emplace_back(a, b);
    }
  }

  Vec logits;
  logits.reserve(tuples.size() + 1);
  for (const auto& [hi, lo] : tuples) {
    logits.push_back((cos[lo] - cos[hi]) / tau);
  }
  logits.push_back(0.0);
  const double value = log_sum_exp(logits);

  // dL/dcos_k accumulated over tuples; the 0 logit carries no gradient.
  Vec coeff(m, 0.0);
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const double p = std::exp(logits[t] - value);
    coeff[tuples[t].second] += p / tau;
    coeff[tuples[t].first] -= p / tau;
  }

  const std::vector<const Vec*> views = flatten(batch);
  std::vector<Vec> grads = zero_grads_like(views);
  for (std::size_t k = 0; k < m; ++k) {
    if (coeff[k] == 0.0) continue;
    axpy(grads[k], coeff[k], cosine_grad_a(batch.lefts[k], batch.rights[k]));
    axpy(grads[m + k], coeff[k], cosine_grad_a(batch.rights[k], batch.lefts[k]));
  }
  return LossOutput{value, std::move(grads)};
}

LossOutput label_nce(const LabeledBatch& batch, double tau) {
  require_tau(tau);
  const std::size_t n = batch.texts.size();
  if (n == 0) throw Error(ErrorCode::empty_batch, "label_nce: empty batch");
  if (batch.pos_labels.size() != n || batch.neg_labels.size() != n) {
    throw Error(ErrorCode::length_mismatch, "label_nce: misaligned batch rows");
  }
  for (const auto& row : batch.neg_labels) {
    if (row.empty()) {
      throw Error(ErrorCode::empty_negatives, "label_nce: row without negatives");
    }
  }

  const std::vector<const Vec*> views = flatten(batch);
  std::vector<std::size_t> neg_base(n);
  std::size_t offset = 2 * n;
  for (std::size_t i = 0; i < n; ++i) {
    neg_base[i] = offset;
    offset += batch.neg_labels[i].size();
  }

  std::vector<const Vec*> anchors(n);
  std::vector<std::size_t> anchor_flat(n);
  std::vector<std::vector<std::size_t>> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    anchors[i] = &batch.texts[i];
    anchor_flat[i] = i;
    auto& cand = candidates[i];
    cand.push_back(n + i);
    for (std::size_t k = 0; k < batch.neg_labels[i].size(); ++k) {
      cand.push_back(neg_base[i] + k);
    }
  }

  SoftmaxRows rows = nce_rows(views, anchors, anchor_flat, candidates, tau);
  return LossOutput{rows.value, std::move(rows.grads)};
}

LossOutput hybrid_loss(Task task, const LossBatch& batch,
                       const LossConfig& config) {
  switch (task) {
    case Task::retrieval:
    case Task::reranking: {
      const auto* b = std::get_if<RetrievalBatch>(&batch);
      if (!b) {
        throw Error(ErrorCode::task_batch_mismatch,
                    std::string(task_name(task)) + " requires a retrieval batch");
      }
      return info_nce(*b, config.tau_retrieval, /*use_in_batch=*/true);
    }
    case Task::sts:
    case Task::pair_classification: {
      const auto* b = std::get_if<ScoredPairBatch>(&batch);
      if (!b) {
        throw Error(ErrorCode::task_batch_mismatch,
                    std::string(task_name(task)) + " requires a scored-pair batch");
      }
      return cosent(*b, config.tau_sts);
    }
    case Task::classification:
    case Task::clustering: {
      const auto* b = std::get_if<LabeledBatch>(&batch);
      if (!b) {
        throw Error(ErrorCode::task_batch_mismatch,
                    std::string(task_name(task)) + " requires a labeled batch");
      }
      return label_nce(*b, config.tau_cls);
    }
  }
  throw Error(ErrorCode::task_batch_mismatch, "unhandled task");
}

}  // namespace ember
