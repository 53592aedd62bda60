#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ember/data.hpp"
#include "ember/encoder.hpp"
#include "ember/losses.hpp"
#include "ember/mrl.hpp"

namespace ember {

/// Loss-routing ablation variants. `la` treats every task as InfoNCE
/// (scored pairs binarized at the dataset score midpoint, labeled rows as
/// text->label retrieval with in-batch negatives). `lb` adds the ranking
/// loss for scored-pair tasks. `lc` is the full hybrid routing.
enum class LossVariant { la, lb, lc };

LossVariant variant_from_string(const std::string& name);
std::string variant_name(LossVariant variant);

struct TrainConfig {
  double lr = 1e-2;
  double lr_min = 0.0;
  std::uint64_t steps = 500;
  std::size_t batch_size = 32;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  MRLConfig mrl;
  LossConfig loss;
  LossVariant variant = LossVariant::lc;
};

void validate_train(const TrainConfig& config);

struct OptimizerState {
  Mat m_embed, v_embed;
  Mat m_proj, v_proj;
  Vec m_bias, v_bias;
  std::uint64_t step = 0;
};

OptimizerState init_optimizer(const EncoderConfig& config);

/// lr_min + 0.5 * (lr_max - lr_min) * (1 + cos(pi * step / total)).
double cosine_lr(std::uint64_t step, std::uint64_t total, double lr_max,
                 double lr_min);

/// One bias-corrected Adam update with decoupled weight decay
/// (p -= lr * wd * p_prev). Increments state.step.
void adamw_step(EncoderParams& params, const EncoderGrads& grads,
                OptimizerState& state, double lr, const TrainConfig& config);

struct LossRow {
  std::uint64_t step = 0;  // 1-based
  Task task = Task::retrieval;
  double lr = 0.0;
  double loss = 0.0;
};

/// CSV with header "step,task,lr,loss"; one row per optimizer step.
std::string render_loss_csv(const std::vector<LossRow>& log);

/// FNV-1a hex digest of the rendered CSV.
std::string loss_log_digest(const std::vector<LossRow>& log);

struct Checkpoint {
  EncoderConfig encoder;
  MRLConfig mrl;
  std::uint64_t step = 0;
  std::string loss_digest;
  EncoderParams params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout: magic "PIC2", u32 version, u32 header length, JSON
/// header (configs, step, digest, array shapes), then each parameter
/// array as little-endian 32-bit floats in declared order.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LossRow> log;
};

/// Full optimization loop: seeded init, per-epoch batch plans, task-routed
/// MRL losses, backprop through the encoder, AdamW with cosine decay.
/// Checkpoint parameters are quantized to 32-bit floats so a saved and
/// reloaded model evaluates bit-identically to the returned one.
TrainResult train(const std::vector<TaskDataset>& datasets,
                  const EncoderConfig& encoder_config,
                  const TrainConfig& config);

}  // namespace ember
