#include "ember/mrl.hpp"

#include <string>

#include "ember/errors.hpp"

namespace ember {

void validate_mrl(const MRLConfig& config) {
  if (config.dims.empty()) {
    throw Error(ErrorCode::config_error, "mrl dims must be non-empty");
  }
  if (config.weights.size() != config.dims.size()) {
    throw Error(ErrorCode::config_error, "mrl weights/dims length mismatch");
  }
  for (std::size_t k = 0; k < config.dims.size(); ++k) {
    if (config.dims[k] < 1) {
      throw Error(ErrorCode::config_error, "mrl dims must be >= 1");
    }
    if (k > 0 && config.dims[k] <= config.dims[k - 1]) {
      throw Error(ErrorCode::config_error, "mrl dims must be strictly increasing");
    }
    if (!(config.weights[k] > 0.0)) {
      throw Error(ErrorCode::config_error, "mrl weights must be > 0");
    }
  }
}

Vec prefix(const Vec& v, std::size_t d) {
  if (d < 1 || d > v.size()) {
    throw Error(ErrorCode::dim_out_of_range,
                "prefix: d = " + std::to_string(d) + " on length " +
                    std::to_string(v.size()));
  }
  return Vec(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(d));
}

namespace {

RetrievalBatch slice(const RetrievalBatch& b, std::size_t d) {
  RetrievalBatch out;
  for (const Vec& v : b.queries) out.queries.push_back(prefix(v, d));
  for (const Vec& v : b.positives) out.positives.push_back(prefix(v, d));
  for (const auto& row : b.hard_negatives) {
    std::vector<Vec> r;
    for (const Vec& v : row) r.push_back(prefix(v, d));
    out.hard_negatives.push_back(std::move(r));
  }
  return out;
}

ScoredPairBatch slice(const ScoredPairBatch& b, std::size_t d) {
  ScoredPairBatch out;
  for (const Vec& v : b.lefts) out.lefts.push_back(prefix(v, d));
  for (const Vec& v : b.rights) out.rights.push_back(prefix(v, d));
  out.scores = b.scores;
  return out;
}

LabeledBatch slice(const LabeledBatch& b, std::size_t d) {
  LabeledBatch out;
  for (const Vec& v : b.texts) out.texts.push_back(prefix(v, d));
  for (const Vec& v : b.pos_labels) out.pos_labels.push_back(prefix(v, d));
  for (const auto& row : b.neg_labels) {
    std::vector<Vec> r;
    for (const Vec& v : row) r.push_back(prefix(v, d));
    out.neg_labels.push_back(std::move(r));
  }
  return out;
}

LossBatch slice_batch(const LossBatch& batch, std::size_t d) {
  return std::visit([d](const auto& b) -> LossBatch { return slice(b, d); },
                    batch);
}

}  // namespace

LossOutput mrl_loss(Task task, const LossBatch& batch, const MRLConfig& mrl,
                    const LossConfig& loss_config) {
  validate_mrl(mrl);
  const std::vector<const Vec*> views = flatten(batch);
  for (const Vec* v : views) {
    if (v->size() < mrl.dims.back()) {
      throw Error(ErrorCode::dim_out_of_range,
                  "mrl_loss: embedding shorter than max mrl dim");
    }
  }

  LossOutput total;
  total.grads.reserve(views.size());
  for (const Vec* v : views) total.grads.emplace_back(v->size(), 0.0);

  for (std::size_t k = 0; k < mrl.dims.size(); ++k) {
    const std::size_t d = mrl.dims[k];
    const double w = mrl.weights[k];
    const LossOutput term = hybrid_loss(task, slice_batch(batch, d), loss_config);
    total.value += w * term.value;
    for (std::size_t i = 0; i < total.grads.size(); ++i) {
      for (std::size_t c = 0; c < d; ++c) {
        total.grads[i][c] += w * term.grads[i][c];
      }
    }
  }
  return total;
}

}  // namespace ember
