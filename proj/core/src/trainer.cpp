#include "ember/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

using nlohmann::json;

LossVariant variant_from_string(const std::string& name) {
  if (name == "la") return LossVariant::la;
  if (name == "lb") return LossVariant::lb;
  if (name == "lc") return LossVariant::lc;
  throw Error(ErrorCode::config_error, "unknown loss variant: " + name);
}

std::string variant_name(LossVariant variant) {
  switch (variant) {
    case LossVariant::la: return "la";
    case LossVariant::lb: return "lb";
    case LossVariant::lc: return "lc";
  }
  throw Error(ErrorCode::config_error, "bad variant enum");
}

void validate_train(const TrainConfig& config) {
  if (!(config.lr > 0.0))
    throw Error(ErrorCode::config_error, "lr must be > 0");
  if (config.lr_min < 0.0 || config.lr_min > config.lr)
    throw Error(ErrorCode::config_error, "lr_min must be in [0, lr]");
  if (config.steps < 1)
    throw Error(ErrorCode::config_error, "steps must be >= 1");
  if (config.batch_size < 2)
    throw Error(ErrorCode::config_error, "batch_size must be >= 2");
  if (!(config.beta1 > 0.0 && config.beta1 < 1.0))
    throw Error(ErrorCode::config_error, "beta1 must be in (0, 1)");
  if (!(config.beta2 > 0.0 && config.beta2 < 1.0))
    throw Error(ErrorCode::config_error, "beta2 must be in (0, 1)");
  if (!(config.eps > 0.0))
    throw Error(ErrorCode::config_error, "eps must be > 0");
  if (config.weight_decay < 0.0)
    throw Error(ErrorCode::config_error, "weight_decay must be >= 0");
  validate_mrl(config.mrl);
}

OptimizerState init_optimizer(const EncoderConfig& config) {
  OptimizerState state;
  state.m_embed = Mat(config.vocab_size, config.hidden_dim);
  state.v_embed = Mat(config.vocab_size, config.hidden_dim);
  state.m_proj = Mat(config.hidden_dim, config.out_dim);
  state.v_proj = Mat(config.hidden_dim, config.out_dim);
  state.m_bias.assign(config.out_dim, 0.0);
  state.v_bias.assign(config.out_dim, 0.0);
  state.step = 0;
  return state;
}

double cosine_lr(std::uint64_t step, std::uint64_t total, double lr_max,
                 double lr_min) {
  if (total == 0) throw Error(ErrorCode::config_error, "total must be >= 1");
  if (step > total)
    throw Error(ErrorCode::config_error, "step past schedule end");
  if (lr_min < 0.0 || lr_max < lr_min)
    throw Error(ErrorCode::config_error, "need lr_max >= lr_min >= 0");
  const double t = static_cast<double>(step) / static_cast<double>(total);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * t));
}

namespace {

void adamw_array(std::vector<double>& p, const std::vector<double>& g,
                 std::vector<double>& m, std::vector<double>& v, double lr,
                 const TrainConfig& config, double bc1, double bc2) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(g[i]))
      throw Error(ErrorCode::non_finite, "non-finite gradient");
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    const double prev = p[i];
    p[i] = prev - lr * (m_hat / (std::sqrt(v_hat) + config.eps) +
                        config.weight_decay * prev);
  }
}

}  // namespace

void adamw_step(EncoderParams& params, const EncoderGrads& grads,
                OptimizerState& state, double lr, const TrainConfig& config) {
  if (params.embed_table.rows != grads.embed_table.rows ||
      params.embed_table.cols != grads.embed_table.cols ||
      params.proj_weight.rows != grads.proj_weight.rows ||
      params.proj_weight.cols != grads.proj_weight.cols ||
      params.proj_bias.size() != grads.proj_bias.size() ||
      state.m_embed.data.size() != params.embed_table.data.size() ||
      state.m_proj.data.size() != params.proj_weight.data.size() ||
      state.m_bias.size() != params.proj_bias.size())
    throw Error(ErrorCode::shape_mismatch, "params/grads/state shapes differ");
  if (lr < 0.0) throw Error(ErrorCode::config_error, "lr must be >= 0");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  adamw_array(params.embed_table.data, grads.embed_table.data,
              state.m_embed.data, state.v_embed.data, lr, config, bc1, bc2);
  adamw_array(params.proj_weight.data, grads.proj_weight.data,
              state.m_proj.data, state.v_proj.data, lr, config, bc1, bc2);
  adamw_array(params.proj_bias, grads.proj_bias, state.m_bias, state.v_bias,
              lr, config, bc1, bc2);
}

std::string render_loss_csv(const std::vector<LossRow>& log) {
  std::string out = "step,task,lr,loss\n";
  char buf[160];
  for (const LossRow& row : log) {
    std::snprintf(buf, sizeof(buf), "%llu,%s,%.17g,%.17g\n",
                  static_cast<unsigned long long>(row.step),
                  task_name(row.task), row.lr, row.loss);
    out += buf;
  }
  return out;
}

std::string loss_log_digest(const std::vector<LossRow>& log) {
  const std::string csv = render_loss_csv(log);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : csv) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {

void append_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t read_u32(const std::string& bytes, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 3])) << 24;
}

void append_f32_array(std::string& out, const std::vector<double>& values) {
  for (double d : values) {
    const float f = static_cast<float>(d);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    append_u32(out, bits);
  }
}

void read_f32_array(const std::string& bytes, std::size_t& at,
                    std::vector<double>& into, std::size_t count) {
  into.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = read_u32(bytes, at);
    float f;
    std::memcpy(&f, &bits, 4);
    into[i] = static_cast<double>(f);
    at += 4;
  }
}

json checkpoint_header(const Checkpoint& ckpt) {
  return json{
      {"encoder",
       {{"vocab_size", ckpt.encoder.vocab_size},
        {"hidden_dim", ckpt.encoder.hidden_dim},
        {"out_dim", ckpt.encoder.out_dim},
        {"ngram", ckpt.encoder.ngram},
        {"hash_seed", ckpt.encoder.hash_seed}}},
      {"mrl", {{"dims", ckpt.mrl.dims}, {"weights", ckpt.mrl.weights}}},
      {"step", ckpt.step},
      {"loss_digest", ckpt.loss_digest},
      {"arrays",
       json::array({
           json{{"name", "embed_table"},
                {"rows", ckpt.params.embed_table.rows},
                {"cols", ckpt.params.embed_table.cols}},
           json{{"name", "proj_weight"},
                {"rows", ckpt.params.proj_weight.rows},
                {"cols", ckpt.params.proj_weight.cols}},
           json{{"name", "proj_bias"},
                {"rows", std::size_t{1}},
                {"cols", ckpt.params.proj_bias.size()}},
       })},
  };
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::string blob = "PIC2";
  append_u32(blob, kCheckpointVersion);
  const std::string header = checkpoint_header(ckpt).dump();
  append_u32(blob, static_cast<std::uint32_t>(header.size()));
  blob += header;
  append_f32_array(blob, ckpt.params.embed_table.data);
  append_f32_array(blob, ckpt.params.proj_weight.data);
  append_f32_array(blob, ckpt.params.proj_bias);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error(ErrorCode::io_error, "cannot rename " + tmp + " to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 12)
    throw Error(ErrorCode::truncated_file, "file shorter than fixed header");
  if (bytes.compare(0, 4, "PIC2") != 0)
    throw Error(ErrorCode::bad_magic, "magic is not PIC2");
  const std::uint32_t version = read_u32(bytes, 4);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::version_mismatch,
                "format version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  const std::uint32_t header_len = read_u32(bytes, 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len))
    throw Error(ErrorCode::truncated_file, "header extends past end of file");

  json header;
  try {
    header = json::parse(bytes.substr(12, header_len));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error,
                std::string("checkpoint header is not valid JSON: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    const json& enc = header.at("encoder");
    ckpt.encoder.vocab_size = enc.at("vocab_size").get<std::size_t>();
    ckpt.encoder.hidden_dim = enc.at("hidden_dim").get<std::size_t>();
    ckpt.encoder.out_dim = enc.at("out_dim").get<std::size_t>();
    ckpt.encoder.ngram = enc.at("ngram").get<std::size_t>();
    ckpt.encoder.hash_seed = enc.at("hash_seed").get<std::uint64_t>();
    ckpt.mrl.dims = header.at("mrl").at("dims").get<std::vector<std::size_t>>();
    ckpt.mrl.weights = header.at("mrl").at("weights").get<std::vector<double>>();
    ckpt.step = header.at("step").get<std::uint64_t>();
    ckpt.loss_digest = header.at("loss_digest").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error,
                std::string("checkpoint header missing fields: ") + e.what());
  }

  const json& arrays = header.at("arrays");
  if (!arrays.is_array() || arrays.size() != 3)
    throw Error(ErrorCode::header_shape_mismatch, "expected 3 parameter arrays");
  std::size_t shapes[3][2];
  const char* names[3] = {"embed_table", "proj_weight", "proj_bias"};
  std::size_t total = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const json& a = arrays[i];
    if (a.at("name").get<std::string>() != names[i])
      throw Error(ErrorCode::header_shape_mismatch,
                  "array " + std::to_string(i) + " is not " + names[i]);
    shapes[i][0] = a.at("rows").get<std::size_t>();
    shapes[i][1] = a.at("cols").get<std::size_t>();
    total += shapes[i][0] * shapes[i][1];
  }
  if (shapes[0][0] != ckpt.encoder.vocab_size ||
      shapes[0][1] != ckpt.encoder.hidden_dim ||
      shapes[1][0] != ckpt.encoder.hidden_dim ||
      shapes[1][1] != ckpt.encoder.out_dim || shapes[2][0] != 1 ||
      shapes[2][1] != ckpt.encoder.out_dim)
    throw Error(ErrorCode::header_shape_mismatch,
                "array shapes disagree with encoder config");

  const std::size_t payload = bytes.size() - 12 - header_len;
  if (payload < total * 4)
    throw Error(ErrorCode::truncated_file, "parameter payload shorter than declared");
  if (payload != total * 4)
    throw Error(ErrorCode::header_shape_mismatch,
                "parameter payload longer than declared");

  std::size_t at = 12 + header_len;
  ckpt.params.embed_table = Mat(shapes[0][0], shapes[0][1]);
  read_f32_array(bytes, at, ckpt.params.embed_table.data,
                 shapes[0][0] * shapes[0][1]);
  ckpt.params.proj_weight = Mat(shapes[1][0], shapes[1][1]);
  read_f32_array(bytes, at, ckpt.params.proj_weight.data,
                 shapes[1][0] * shapes[1][1]);
  read_f32_array(bytes, at, ckpt.params.proj_bias, shapes[2][1]);
  return ckpt;
}

namespace {

/// A fully assembled optimizer step: the loss batch (embeddings), the task
/// the router should treat it as, and the trace behind every embedding in
/// flatten() order.
struct Assembled {
  Task route;
  LossBatch batch;
  std::vector<EncodeTrace> traces;
};

class BatchAssembler {
 public:
  BatchAssembler(const std::vector<TaskDataset>& datasets,
                 const EncoderConfig& encoder_config,
                 const TrainConfig& config)
      : datasets_(datasets), encoder_(encoder_config), config_(config) {
    midpoints_.resize(datasets.size(), 0.0);
    for (std::size_t d = 0; d < datasets.size(); ++d) {
      if (datasets[d].task != Task::sts &&
          datasets[d].task != Task::pair_classification)
        continue;
      double lo = 0.0, hi = 0.0;
      bool first = true;
      for (const TrainExample& ex : datasets[d].examples) {
        const double s = std::get<ScoredExample>(ex).score;
        lo = first ? s : std::min(lo, s);
        hi = first ? s : std::max(hi, s);
        first = false;
      }
      midpoints_[d] = 0.5 * (lo + hi);
    }
  }

  /// Returns nothing when the variant conversion empties the batch.
  std::optional<Assembled> assemble(const BatchPlan::Entry& entry,
                                    const EncoderParams& params,
                                    std::uint64_t entry_seed) const {
    const TaskDataset& ds = datasets_[entry.dataset_index];
    switch (ds.task) {
      case Task::retrieval:
      case Task::reranking:
        return retrieval_batch(entry, ds, params, entry_seed);
      case Task::sts:
      case Task::pair_classification:
        if (config_.variant == LossVariant::la)
          return thresholded_batch(entry, ds, params);
        return scored_batch(entry, ds, params);
      case Task::classification:
      case Task::clustering:
        if (config_.variant == LossVariant::lc)
          return labeled_batch(entry, ds, params);
        return label_retrieval_batch(entry, ds, params);
    }
    throw Error(ErrorCode::task_batch_mismatch, "bad task enum");
  }

 private:
  Vec embed(const std::string& text, const EncoderParams& params,
            std::vector<EncodeTrace>& traces) const {
    traces.push_back(encode(text, params, encoder_));
    return traces.back().output;
  }

  std::optional<Assembled> retrieval_batch(const BatchPlan::Entry& entry,
                                           const TaskDataset& ds,
                                           const EncoderParams& params,
                                           std::uint64_t entry_seed) const {
    Rng rng(mix_seed(entry_seed, 0x4e6));
    std::vector<std::string> queries, positives;
    std::vector<std::vector<std::string>> negatives;
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<RetrievalExample>(ds.examples[idx]);
      queries.push_back(ex.query);
      positives.push_back(ex.pos.front());
      std::vector<std::string> negs;
      if (!ex.neg.empty()) negs.push_back(ex.neg[bounded(rng, ex.neg.size())]);
      negatives.push_back(std::move(negs));
    }
    return finish_retrieval(queries, positives, negatives, params);
  }

  std::optional<Assembled> scored_batch(const BatchPlan::Entry& entry,
                                        const TaskDataset& ds,
                                        const EncoderParams& params) const {
    Assembled out;
    out.route = Task::sts;
    ScoredPairBatch batch;
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<ScoredExample>(ds.examples[idx]);
      batch.lefts.push_back(embed(ex.text_a, params, out.traces));
      batch.scores.push_back(ex.score);
    }
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<ScoredExample>(ds.examples[idx]);
      batch.rights.push_back(embed(ex.text_b, params, out.traces));
    }
    out.batch = std::move(batch);
    return out;
  }

  /// la: binarize scored pairs at the dataset score midpoint. Above-midpoint
  /// rows become (query, positive); each remaining row donates its text_b as
  /// a hard negative, round-robin over the kept rows.
  std::optional<Assembled> thresholded_batch(const BatchPlan::Entry& entry,
                                             const TaskDataset& ds,
                                             const EncoderParams& params) const {
    const double mid = midpoints_[entry.dataset_index];
    std::vector<std::string> queries, positives;
    std::vector<std::vector<std::string>> negatives;
    std::vector<std::string> dropped;
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<ScoredExample>(ds.examples[idx]);
      if (ex.score > mid) {
        queries.push_back(ex.text_a);
        positives.push_back(ex.text_b);
        negatives.emplace_back();
      } else {
        dropped.push_back(ex.text_b);
      }
    }
    if (queries.empty()) return std::nullopt;
    for (std::size_t i = 0; i < dropped.size(); ++i)
      negatives[i % queries.size()].push_back(std::move(dropped[i]));
    return finish_retrieval(queries, positives, negatives, params);
  }

  std::optional<Assembled> labeled_batch(const BatchPlan::Entry& entry,
                                         const TaskDataset& ds,
                                         const EncoderParams& params) const {
    Assembled out;
    out.route = Task::classification;
    LabeledBatch batch;
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<LabeledExample>(ds.examples[idx]);
      batch.texts.push_back(embed(ex.text, params, out.traces));
    }
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<LabeledExample>(ds.examples[idx]);
      batch.pos_labels.push_back(embed(ex.pos_label, params, out.traces));
    }
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<LabeledExample>(ds.examples[idx]);
      std::vector<Vec> negs;
      for (const std::string& label : ex.neg_labels)
        negs.push_back(embed(label, params, out.traces));
      batch.neg_labels.push_back(std::move(negs));
    }
    out.batch = std::move(batch);
    return out;
  }

  /// la/lb: treat labeled rows as text -> own-label retrieval with the other
  /// labels as hard negatives, leaving in-batch negatives on (so rows that
  /// share a label see their own positive among the negatives).
  std::optional<Assembled> label_retrieval_batch(const BatchPlan::Entry& entry,
                                                 const TaskDataset& ds,
                                                 const EncoderParams& params) const {
    std::vector<std::string> queries, positives;
    std::vector<std::vector<std::string>> negatives;
    for (std::size_t idx : entry.indices) {
      const auto& ex = std::get<LabeledExample>(ds.examples[idx]);
      queries.push_back(ex.text);
      positives.push_back(ex.pos_label);
      negatives.push_back(ex.neg_labels);
    }
    return finish_retrieval(queries, positives, negatives, params);
  }

  std::optional<Assembled> finish_retrieval(
      const std::vector<std::string>& queries,
      const std::vector<std::string>& positives,
      const std::vector<std::vector<std::string>>& negatives,
      const EncoderParams& params) const {
    Assembled out;
    out.route = Task::retrieval;
    RetrievalBatch batch;
    for (const std::string& q : queries)
      batch.queries.push_back(embed(q, params, out.traces));
    for (const std::string& p : positives)
      batch.positives.push_back(embed(p, params, out.traces));
    for (const auto& negs : negatives) {
      std::vector<Vec> row;
      for (const std::string& n : negs) row.push_back(embed(n, params, out.traces));
      batch.hard_negatives.push_back(std::move(row));
    }
    out.batch = std::move(batch);
    return out;
  }

  const std::vector<TaskDataset>& datasets_;
  EncoderConfig encoder_;
  const TrainConfig& config_;
  std::vector<double> midpoints_;
};

void quantize_f32(std::vector<double>& values) {
  for (double& d : values) d = static_cast<double>(static_cast<float>(d));
}

}  // namespace

TrainResult train(const std::vector<TaskDataset>& datasets,
                  const EncoderConfig& encoder_config,
                  const TrainConfig& config) {
  validate_config(encoder_config);
  validate_train(config);
  if (datasets.empty())
    throw Error(ErrorCode::empty_dataset, "no training datasets");
  for (std::size_t d : config.mrl.dims)
    if (d > encoder_config.out_dim)
      throw Error(ErrorCode::dim_out_of_range,
                  "mrl dim " + std::to_string(d) + " exceeds out_dim " +
                      std::to_string(encoder_config.out_dim));

  EncoderParams params = random_params(encoder_config, config.seed);
  OptimizerState state = init_optimizer(encoder_config);
  BatchAssembler assembler(datasets, encoder_config, config);

  TrainResult result;
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  while (step < config.steps) {
    const BatchPlan plan =
        plan_batches(datasets, config.batch_size, mix_seed(config.seed, 0xe70c + epoch));
    bool progressed = false;
    for (std::size_t e = 0; e < plan.schedule.size() && step < config.steps; ++e) {
      const BatchPlan::Entry& entry = plan.schedule[e];
      const std::uint64_t entry_seed =
          mix_seed(mix_seed(config.seed, 0xba7c + epoch), e);
      std::optional<Assembled> assembled =
          assembler.assemble(entry, params, entry_seed);
      if (!assembled) continue;

      LossOutput out = mrl_loss(assembled->route, assembled->batch, config.mrl,
                                config.loss);
      if (!std::isfinite(out.value))
        throw Error(ErrorCode::non_finite,
                    "aborting: non-finite loss at step " + std::to_string(step + 1));

      const double lr = cosine_lr(step, config.steps, config.lr, config.lr_min);
      result.log.push_back({step + 1, entry.task, lr, out.value});

      EncoderGrads grads = zero_grads(encoder_config);
      if (out.grads.size() != assembled->traces.size())
        throw Error(ErrorCode::shape_mismatch,
                    "loss gradients misaligned with encoded texts");
      for (std::size_t i = 0; i < out.grads.size(); ++i)
        encode_backward_into(assembled->traces[i], out.grads[i], params, grads);

      adamw_step(params, grads, state, lr, config);
      progressed = true;
      ++step;
    }
    if (!progressed)
      throw Error(ErrorCode::empty_batch,
                  "no trainable batch in a full epoch (variant filtered everything)");
    ++epoch;
  }

  quantize_f32(params.embed_table.data);
  quantize_f32(params.proj_weight.data);
  quantize_f32(params.proj_bias);

  result.checkpoint.encoder = encoder_config;
  result.checkpoint.mrl = config.mrl;
  result.checkpoint.step = step;
  result.checkpoint.loss_digest = loss_log_digest(result.log);
  result.checkpoint.params = std::move(params);
  return result;
}

}  // namespace ember
