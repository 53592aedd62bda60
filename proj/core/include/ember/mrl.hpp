#pragma once

#include <cstddef>
#include <vector>

#include "ember/losses.hpp"
#include "ember/numerics.hpp"

namespace ember {

/// Nested prefix dimensions the hybrid loss is summed over during training.
struct MRLConfig {
  std::vector<std::size_t> dims = {16, 32, 64, 128};  // strictly increasing
  std::vector<double> weights = {1.0, 1.0, 1.0, 1.0};
};

void validate_mrl(const MRLConfig& config);

/// First d coordinates of v, un-normalized (cosine downstream normalizes).
Vec prefix(const Vec& v, std::size_t d);

/// Sum over k of weights[k] * hybrid_loss(task, batch sliced to dims[k]).
/// Gradients accumulate into full-length embedding slots; coordinates at or
/// beyond a prefix receive zero from that term.
LossOutput mrl_loss(Task task, const LossBatch& batch, const MRLConfig& mrl,
                    const LossConfig& loss_config);

}  // namespace ember
