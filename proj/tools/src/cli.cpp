#include "ember_cli/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ember/data.hpp"
#include "ember/encoder.hpp"
#include "ember/eval.hpp"
#include "ember/losses.hpp"
#include "ember/mining.hpp"
#include "ember/mrl.hpp"
#include "ember/numerics.hpp"
#include "ember/rng.hpp"
#include "ember/synth.hpp"
#include "ember/toygen.hpp"
#include "ember/trainer.hpp"
#include "ember/version.hpp"

namespace ember_cli {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ember;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error:
    case ErrorCode::batch_too_small:
      return 2;
    case ErrorCode::parse_error:
    case ErrorCode::schema_error:
    case ErrorCode::empty_dataset:
    case ErrorCode::unknown_label:
    case ErrorCode::degenerate_label_set:
    case ErrorCode::empty_corpus:
    case ErrorCode::window_empty:
    case ErrorCode::bad_magic:
    case ErrorCode::version_mismatch:
    case ErrorCode::truncated_file:
    case ErrorCode::header_shape_mismatch:
    case ErrorCode::missing_split:
    case ErrorCode::degenerate_clusters:
    case ErrorCode::single_class:
    case ErrorCode::no_relevant_docs:
    case ErrorCode::constant_input:
    case ErrorCode::empty_text:
    case ErrorCode::empty_batch:
    case ErrorCode::empty_negatives:
    case ErrorCode::io_error:
      return 3;
    case ErrorCode::non_finite:
      return 4;
    case ErrorCode::dim_out_of_range:
      return 5;
    case ErrorCode::auth_error:
    case ErrorCode::rate_limited:
    case ErrorCode::timeout:
    case ErrorCode::service_error:
    case ErrorCode::not_json:
    case ErrorCode::missing_key:
    case ErrorCode::too_short:
      return 6;
    default:
      return 1;
  }
}

namespace {

// ---------- config file ----------

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot open config " + path);
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_error,
                path + " is not valid JSON: " + e.what());
  }
  if (!config.is_object())
    throw Error(ErrorCode::config_error, path + " must hold a JSON object");
  return config;
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw Error(ErrorCode::config_error,
                  where + ": unknown key \"" + item.key() + "\"");
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config_error,
                std::string("bad value for \"") + key + "\": " + e.what());
  }
}

EncoderConfig parse_encoder_config(const json& root) {
  EncoderConfig config;
  if (!root.contains("encoder")) return config;
  const json& section = root["encoder"];
  reject_unknown_keys(section,
                      {"vocab_size", "hidden_dim", "out_dim", "ngram", "hash_seed"},
                      "encoder");
  config.vocab_size = get_or<std::size_t>(section, "vocab_size", config.vocab_size);
  config.hidden_dim = get_or<std::size_t>(section, "hidden_dim", config.hidden_dim);
  config.out_dim = get_or<std::size_t>(section, "out_dim", config.out_dim);
  config.ngram = get_or<std::size_t>(section, "ngram", config.ngram);
  config.hash_seed = get_or<std::uint64_t>(section, "hash_seed", config.hash_seed);
  return config;
}

TrainConfig parse_train_config(const json& root) {
  TrainConfig config;
  if (root.contains("train")) {
    const json& section = root["train"];
    reject_unknown_keys(section,
                        {"lr", "lr_min", "steps", "batch_size", "weight_decay",
                         "beta1", "beta2", "eps", "seed", "variant"},
                        "train");
    config.lr = get_or<double>(section, "lr", config.lr);
    config.lr_min = get_or<double>(section, "lr_min", config.lr_min);
    config.steps = get_or<std::uint64_t>(section, "steps", config.steps);
    config.batch_size = get_or<std::size_t>(section, "batch_size", config.batch_size);
    config.weight_decay =
        get_or<double>(section, "weight_decay", config.weight_decay);
    config.beta1 = get_or<double>(section, "beta1", config.beta1);
    config.beta2 = get_or<double>(section, "beta2", config.beta2);
    config.eps = get_or<double>(section, "eps", config.eps);
    config.seed = get_or<std::uint64_t>(section, "seed", config.seed);
    if (section.contains("variant"))
      config.variant = variant_from_string(section["variant"].get<std::string>());
  }
  if (root.contains("mrl")) {
    const json& section = root["mrl"];
    reject_unknown_keys(section, {"dims", "weights"}, "mrl");
    config.mrl.dims =
        get_or<std::vector<std::size_t>>(section, "dims", config.mrl.dims);
    if (section.contains("weights"))
      config.mrl.weights = section["weights"].get<std::vector<double>>();
    else
      config.mrl.weights.assign(config.mrl.dims.size(), 1.0);
  }
  if (root.contains("loss")) {
    const json& section = root["loss"];
    reject_unknown_keys(section, {"tau_retrieval", "tau_sts", "tau_cls"}, "loss");
    config.loss.tau_retrieval =
        get_or<double>(section, "tau_retrieval", config.loss.tau_retrieval);
    config.loss.tau_sts = get_or<double>(section, "tau_sts", config.loss.tau_sts);
    config.loss.tau_cls = get_or<double>(section, "tau_cls", config.loss.tau_cls);
  }
  return config;
}

std::vector<std::string> parse_path_list(const json& root, const char* key) {
  if (!root.contains(key)) return {};
  if (!root[key].is_array())
    throw Error(ErrorCode::config_error,
                std::string("\"") + key + "\" must be an array of paths");
  std::vector<std::string> out;
  for (const auto& p : root[key]) {
    if (!p.is_string())
      throw Error(ErrorCode::config_error,
                  std::string("\"") + key + "\" must hold strings");
    out.push_back(p.get<std::string>());
  }
  return out;
}

// ---------- file helpers ----------

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp);
    out << content;
    if (!out) throw Error(ErrorCode::io_error, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error(ErrorCode::io_error, "cannot rename " + tmp);
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + dir);
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    std::uint64_t seed, const json& resolved_config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json manifest = {
      {"command", command}, {"version", kVersion},
      {"seed", seed},       {"config", resolved_config},
      {"inputs", inputs},   {"outputs", outputs},
  };
  write_file_atomic(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

json resolved_train_json(const EncoderConfig& enc, const TrainConfig& config) {
  return json{
      {"encoder",
       {{"vocab_size", enc.vocab_size},
        {"hidden_dim", enc.hidden_dim},
        {"out_dim", enc.out_dim},
        {"ngram", enc.ngram},
        {"hash_seed", enc.hash_seed}}},
      {"train",
       {{"lr", config.lr},
        {"lr_min", config.lr_min},
        {"steps", config.steps},
        {"batch_size", config.batch_size},
        {"weight_decay", config.weight_decay},
        {"beta1", config.beta1},
        {"beta2", config.beta2},
        {"eps", config.eps},
        {"seed", config.seed},
        {"variant", variant_name(config.variant)}}},
      {"mrl", {{"dims", config.mrl.dims}, {"weights", config.mrl.weights}}},
      {"loss",
       {{"tau_retrieval", config.loss.tau_retrieval},
        {"tau_sts", config.loss.tau_sts},
        {"tau_cls", config.loss.tau_cls}}},
  };
}

// ---------- shared flag state ----------

struct Flags {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint64_t steps = 0;
  bool steps_set = false;
  double lr = 0.0;
  bool lr_set = false;
  std::string dims = "";
  bool mock = false;
  std::string endpoint;
  std::string fixture;
  std::string checkpoint;
  std::string input;
  std::string task = "classification";
  int phase = 2;
  std::string topics_path;
};

std::vector<std::size_t> parse_dims(const std::string& dims) {
  std::vector<std::size_t> out;
  std::string token;
  for (char c : dims + ",") {
    if (c == ',') {
      if (token.empty()) continue;
      try {
        out.push_back(static_cast<std::size_t>(std::stoull(token)));
      } catch (const std::exception&) {
        throw Error(ErrorCode::config_error, "bad --dims entry: " + token);
      }
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  if (out.empty()) throw Error(ErrorCode::config_error, "--dims is empty");
  return out;
}

// ---------- subcommands ----------

int cmd_train(const Flags& flags) {
  const json root = load_config_file(flags.config_path);
  EncoderConfig encoder = parse_encoder_config(root);
  TrainConfig config = parse_train_config(root);
  if (flags.seed_set) config.seed = flags.seed;
  if (flags.steps_set) config.steps = flags.steps;
  if (flags.lr_set) config.lr = flags.lr;

  const std::vector<std::string> data_paths = parse_path_list(root, "data");
  if (data_paths.empty())
    throw Error(ErrorCode::config_error, "config has no \"data\" paths");
  validate_config(encoder);
  validate_train(config);

  std::vector<TaskDataset> datasets;
  for (const std::string& path : data_paths) datasets.push_back(load_jsonl(path));

  ensure_out_dir(flags.out_dir);
  const std::string ckpt_path = flags.out_dir + "/checkpoint.pic2";
  const std::string csv_path = flags.out_dir + "/loss.csv";
  write_manifest(flags.out_dir, "train", config.seed,
                 resolved_train_json(encoder, config), data_paths,
                 {ckpt_path, csv_path});

  TrainResult result = train(datasets, encoder, config);
  save_checkpoint(result.checkpoint, ckpt_path);
  write_file_atomic(csv_path, render_loss_csv(result.log));

  std::printf("trained %llu steps, final loss %.6f, seed %llu\n",
              static_cast<unsigned long long>(result.checkpoint.step),
              result.log.back().loss,
              static_cast<unsigned long long>(config.seed));
  std::printf("checkpoint: %s\nloss log: %s\n", ckpt_path.c_str(),
              csv_path.c_str());
  return 0;
}

int cmd_eval(const Flags& flags) {
  const json root = load_config_file(flags.config_path);
  const std::vector<std::string> eval_paths = parse_path_list(root, "eval");
  if (eval_paths.empty())
    throw Error(ErrorCode::config_error, "config has no \"eval\" paths");
  if (flags.checkpoint.empty())
    throw Error(ErrorCode::config_error, "--checkpoint is required");

  const Checkpoint ckpt = load_checkpoint(flags.checkpoint);
  std::vector<std::size_t> dims = flags.dims.empty()
                                      ? std::vector<std::size_t>{ckpt.encoder.out_dim}
                                      : parse_dims(flags.dims);
  for (std::size_t d : dims)
    if (d == 0 || d > ckpt.encoder.out_dim)
      throw Error(ErrorCode::dim_out_of_range,
                  "--dims " + std::to_string(d) + " exceeds checkpoint out_dim " +
                      std::to_string(ckpt.encoder.out_dim));

  std::vector<EvalDataset> suites;
  for (const std::string& path : eval_paths)
    suites.push_back(load_eval_jsonl(path));

  const std::uint64_t seed = flags.seed_set ? flags.seed : 0;
  ensure_out_dir(flags.out_dir);
  std::vector<std::string> outputs;
  for (std::size_t d : dims)
    outputs.push_back(flags.out_dir + "/report_dim" + std::to_string(d) + ".json");
  write_manifest(flags.out_dir, "eval", seed,
                 json{{"checkpoint", flags.checkpoint}, {"dims", dims}},
                 eval_paths, outputs);

  for (std::size_t i = 0; i < dims.size(); ++i) {
    const EvalReport report =
        eval_all(ckpt.params, ckpt.encoder, suites, dims[i], seed);
    write_file_atomic(outputs[i], render_report_json(report) + "\n");
    std::fputs(render_report_text(report).c_str(), stdout);
  }
  return 0;
}

int cmd_mine(const Flags& flags) {
  const json root = load_config_file(flags.config_path);
  EncoderConfig encoder = parse_encoder_config(root);
  MiningConfig mining;
  if (root.contains("mining")) {
    const json& section = root["mining"];
    reject_unknown_keys(section,
                        {"rank_lo", "rank_hi", "samples_per_query", "seed"},
                        "mining");
    mining.rank_lo = get_or<std::size_t>(section, "rank_lo", mining.rank_lo);
    mining.rank_hi = get_or<std::size_t>(section, "rank_hi", mining.rank_hi);
    mining.samples_per_query =
        get_or<std::size_t>(section, "samples_per_query", mining.samples_per_query);
    mining.seed = get_or<std::uint64_t>(section, "seed", mining.seed);
  }
  if (flags.seed_set) mining.seed = flags.seed;
  validate_mining(mining);

  const std::vector<std::string> data_paths = parse_path_list(root, "data");
  if (data_paths.size() != 1)
    throw Error(ErrorCode::config_error,
                "mine needs exactly one \"data\" path (retrieval JSONL)");
  const std::string corpus_path = get_or<std::string>(root, "corpus", "");
  if (corpus_path.empty())
    throw Error(ErrorCode::config_error,
                "config has no \"corpus\" path (one document per line)");

  const TaskDataset dataset = load_jsonl(data_paths[0]);
  if (dataset.task != Task::retrieval && dataset.task != Task::reranking)
    throw Error(ErrorCode::schema_error, "mine expects retrieval-schema data");

  std::vector<std::string> corpus;
  {
    std::ifstream in(corpus_path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + corpus_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) corpus.push_back(line);
    }
  }

  EncoderParams params;
  if (!flags.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(flags.checkpoint);
    encoder = ckpt.encoder;
    params = ckpt.params;
  } else {
    params = random_params(encoder, mining.seed);
  }

  std::vector<RetrievalExample> examples;
  for (const TrainExample& ex : dataset.examples)
    examples.push_back(std::get<RetrievalExample>(ex));

  ensure_out_dir(flags.out_dir);
  const std::string out_path = flags.out_dir + "/mined.jsonl";
  write_manifest(flags.out_dir, "mine", mining.seed,
                 json{{"mining",
                       {{"rank_lo", mining.rank_lo},
                        {"rank_hi", mining.rank_hi},
                        {"samples_per_query", mining.samples_per_query},
                        {"seed", mining.seed}}},
                      {"corpus", corpus_path},
                      {"checkpoint", flags.checkpoint}},
                 {data_paths[0], corpus_path}, {out_path});

  const std::vector<RetrievalExample> mined =
      mine_dataset(examples, corpus, params, encoder, mining);
  std::string out;
  for (const RetrievalExample& ex : mined)
    out += to_jsonl_line(dataset.task, ex) + "\n";
  write_file_atomic(out_path, out);
  std::printf("mined %zu queries x %zu negatives -> %s\n", mined.size(),
              mining.samples_per_query, out_path.c_str());
  return 0;
}

int cmd_synth(const Flags& flags) {
  const json root = load_config_file(flags.config_path);
  SynthConfig config;
  std::string endpoint;
  std::vector<std::string> example_tasks;
  std::size_t num_topics = 8;
  if (root.contains("synth")) {
    const json& section = root["synth"];
    reject_unknown_keys(section,
                        {"model", "temperature", "max_tokens", "language",
                         "generations_per_topic", "max_in_flight", "seed",
                         "endpoint", "example_tasks", "num_topics"},
                        "synth");
    config.model = get_or<std::string>(section, "model", config.model);
    config.temperature = get_or<double>(section, "temperature", config.temperature);
    config.max_tokens = get_or<int>(section, "max_tokens", config.max_tokens);
    config.language = get_or<std::string>(section, "language", config.language);
    config.generations_per_topic = get_or<std::size_t>(
        section, "generations_per_topic", config.generations_per_topic);
    config.max_in_flight =
        get_or<std::size_t>(section, "max_in_flight", config.max_in_flight);
    config.seed = get_or<std::uint64_t>(section, "seed", config.seed);
    endpoint = get_or<std::string>(section, "endpoint", "");
    example_tasks = get_or<std::vector<std::string>>(section, "example_tasks", {});
    num_topics = get_or<std::size_t>(section, "num_topics", num_topics);
  }
  if (flags.seed_set) config.seed = flags.seed;
  if (!flags.endpoint.empty()) endpoint = flags.endpoint;

  std::unique_ptr<LLMClient> client;
  if (flags.mock) {
    client = flags.fixture.empty()
                 ? std::make_unique<MockLLMClient>()
                 : std::make_unique<MockLLMClient>(flags.fixture);
  } else {
    if (endpoint.empty())
      throw Error(ErrorCode::config_error,
                  "no endpoint configured (use --endpoint or synth.endpoint)");
    client = std::make_unique<HttpLLMClient>(endpoint);
  }

  ensure_out_dir(flags.out_dir);
  if (flags.phase == 1) {
    if (example_tasks.size() != 2)
      throw Error(ErrorCode::config_error,
                  "synth.example_tasks must hold exactly 2 strings");
    const std::string out_path = flags.out_dir + "/topics.txt";
    write_manifest(flags.out_dir, "synth", config.seed,
                   json{{"phase", 1},
                        {"mock", flags.mock},
                        {"model", config.model},
                        {"num_topics", num_topics},
                        {"example_tasks", example_tasks}},
                   {}, {out_path});
    const std::vector<std::string> topics = generate_topics(
        example_tasks[0], example_tasks[1], num_topics, config, *client);
    std::string out;
    for (const std::string& t : topics) out += t + "\n";
    write_file_atomic(out_path, out);
    std::printf("wrote %zu topics to %s\n", topics.size(), out_path.c_str());
    return 0;
  }

  // phase 2
  std::string topics_path = flags.topics_path;
  if (topics_path.empty())
    topics_path = get_or<std::string>(root, "topics", "");
  if (topics_path.empty())
    throw Error(ErrorCode::config_error,
                "phase 2 needs --topics (one topic per line)");
  std::vector<std::string> topics;
  {
    std::ifstream in(topics_path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + topics_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) topics.push_back(line);
    }
  }
  if (topics.empty())
    throw Error(ErrorCode::empty_input, topics_path + " holds no topics");

  const std::string out_path = flags.out_dir + "/synth.jsonl";
  write_manifest(flags.out_dir, "synth", config.seed,
                 json{{"phase", 2},
                      {"mock", flags.mock},
                      {"model", config.model},
                      {"language", config.language},
                      {"generations_per_topic", config.generations_per_topic},
                      {"max_in_flight", config.max_in_flight}},
                 {topics_path}, {out_path});

  const std::vector<RetrievalExample> examples =
      generate_triplets(topics, config, *client);
  std::string out;
  for (const RetrievalExample& ex : examples)
    out += to_jsonl_line(Task::retrieval, ex) + "\n";
  write_file_atomic(out_path, out);
  std::printf("wrote %zu triplets (%zu topics x %zu) to %s\n", examples.size(),
              topics.size(), config.generations_per_topic, out_path.c_str());
  return 0;
}

// Finite-difference sweep for one loss over seeded random batches; returns
// the max relative error across every embedding coordinate.
template <typename Batch, typename LossFn, typename RebuildFn>
double fd_sweep(const Batch& batch, const LossFn& loss_fn,
                const RebuildFn& rebuild, std::size_t n_slots) {
  double max_err = 0.0;
  const LossOutput base = loss_fn(batch);
  for (std::size_t slot = 0; slot < n_slots; ++slot) {
    const std::vector<const Vec*> flat = flatten(batch);
    const Vec x0 = *flat[slot];
    const Vec fd = finite_diff_grad(
        [&](const Vec& x) {
          Batch b = rebuild(batch, slot, x);
          return loss_fn(b).value;
        },
        x0);
    for (std::size_t j = 0; j < x0.size(); ++j)
      max_err = std::max(max_err, rel_error(base.grads[slot][j], fd[j]));
  }
  return max_err;
}

template <typename Batch>
Batch replace_slot(const Batch& batch, std::size_t slot, const Vec& x) {
  Batch copy = batch;
  std::vector<const Vec*> flat = flatten(copy);
  *const_cast<Vec*>(flat[slot]) = x;
  return copy;
}

Vec random_vec(Rng& rng, std::size_t dim) {
  Vec v(dim);
  for (double& x : v) x = uniform_real(rng, -1.0, 1.0);
  return v;
}

int cmd_gradcheck(const Flags& flags) {
  const std::uint64_t seed = flags.seed_set ? flags.seed : 42;
  const std::size_t dim = 8, rows = 4;
  const double tau = 0.05;
  double err_info = 0.0, err_cosent = 0.0, err_label = 0.0;

  for (std::size_t rep = 0; rep < 5; ++rep) {
    Rng rng(mix_seed(seed, rep));
    RetrievalBatch rb;
    for (std::size_t i = 0; i < rows; ++i) {
      rb.queries.push_back(random_vec(rng, dim));
      rb.positives.push_back(random_vec(rng, dim));
      rb.hard_negatives.push_back({random_vec(rng, dim), random_vec(rng, dim)});
    }
    err_info = std::max(
        err_info,
        fd_sweep(rb, [&](const RetrievalBatch& b) { return info_nce(b, tau); },
                 replace_slot<RetrievalBatch>, flatten(rb).size()));

    ScoredPairBatch sb;
    for (std::size_t i = 0; i < rows + 2; ++i) {
      sb.lefts.push_back(random_vec(rng, dim));
      sb.rights.push_back(random_vec(rng, dim));
      sb.scores.push_back(static_cast<double>(bounded(rng, 4)));
    }
    if (sb.scores.front() == sb.scores.back()) sb.scores.back() += 1.0;
    err_cosent = std::max(
        err_cosent,
        fd_sweep(sb, [&](const ScoredPairBatch& b) { return cosent(b, tau); },
                 replace_slot<ScoredPairBatch>, flatten(sb).size()));

    LabeledBatch lb;
    for (std::size_t i = 0; i < rows; ++i) {
      lb.texts.push_back(random_vec(rng, dim));
      lb.pos_labels.push_back(random_vec(rng, dim));
      lb.neg_labels.push_back(
          {random_vec(rng, dim), random_vec(rng, dim), random_vec(rng, dim)});
    }
    err_label = std::max(
        err_label,
        fd_sweep(lb, [&](const LabeledBatch& b) { return label_nce(b, tau); },
                 replace_slot<LabeledBatch>, flatten(lb).size()));
  }

  std::printf("loss=info_nce max_rel_err=%.3e\n", err_info);
  std::printf("loss=cosent max_rel_err=%.3e\n", err_cosent);
  std::printf("loss=label_nce max_rel_err=%.3e\n", err_label);
  const double tolerance = 1e-4;
  return (err_info < tolerance && err_cosent < tolerance && err_label < tolerance)
             ? 0
             : 1;
}

int cmd_reformat(const Flags& flags) {
  if (flags.input.empty())
    throw Error(ErrorCode::config_error, "--in is required");
  const Task task = task_from_string(flags.task);
  if (task != Task::classification && task != Task::clustering)
    throw Error(ErrorCode::config_error,
                "--task must be classification or clustering");

  std::ifstream in(flags.input);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + flags.input);
  std::vector<std::pair<std::string, std::string>> rows;
  std::vector<std::string> label_set;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string() ||
        !obj.contains("label") || !obj["label"].is_string())
      throw Error(ErrorCode::schema_error,
                  "line " + std::to_string(line_no) +
                      ": expected {\"text\": ..., \"label\": ...}");
    for (const auto& item : obj.items())
      if (item.key() != "text" && item.key() != "label")
        throw Error(ErrorCode::schema_error,
                    "line " + std::to_string(line_no) + ": unknown field \"" +
                        item.key() + "\"");
    rows.emplace_back(obj["text"].get<std::string>(),
                      obj["label"].get<std::string>());
    if (seen.insert(rows.back().second).second)
      label_set.push_back(rows.back().second);
  }
  if (rows.empty()) throw Error(ErrorCode::empty_dataset, flags.input);

  ensure_out_dir(flags.out_dir);
  const std::string out_path = flags.out_dir + "/reformatted.jsonl";
  write_manifest(flags.out_dir, "reformat", 0,
                 json{{"task", flags.task}, {"labels", label_set}},
                 {flags.input}, {out_path});

  const std::vector<LabeledExample> examples = reformat_labeled(rows, label_set);
  std::string out;
  for (const LabeledExample& ex : examples)
    out += to_jsonl_line(task, ex) + "\n";
  write_file_atomic(out_path, out);
  std::printf("reformatted %zu rows over %zu labels -> %s\n", examples.size(),
              label_set.size(), out_path.c_str());
  return 0;
}

int cmd_gen_toy(const Flags& flags) {
  ToyConfig config;
  if (flags.seed_set) config.seed = flags.seed;
  ensure_out_dir(flags.out_dir);
  const std::vector<GeneratedFile> files = generate_toy_suite(config);
  std::vector<std::string> outputs;
  for (const GeneratedFile& f : files) outputs.push_back(flags.out_dir + "/" + f.name);
  write_manifest(flags.out_dir, "gen-toy", config.seed, json{{"seed", config.seed}},
                 {}, outputs);
  for (const GeneratedFile& f : files)
    write_file_atomic(flags.out_dir + "/" + f.name, f.jsonl);
  std::printf("wrote %zu toy files to %s\n", files.size(), flags.out_dir.c_str());
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"desk-scale contrastive embedding trainer"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* cmd, bool with_config) {
    if (with_config)
      cmd->add_option("--config", flags.config_path, "JSON config file")
          ->required();
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
  };

  CLI::App* train = app.add_subcommand("train", "train an encoder");
  add_common(train, true);
  train->add_option("--steps", flags.steps, "step-count override")
      ->each([&](const std::string&) { flags.steps_set = true; });
  train->add_option("--lr", flags.lr, "learning-rate override")
      ->each([&](const std::string&) { flags.lr_set = true; });

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval, true);
  eval->add_option("--checkpoint", flags.checkpoint, "checkpoint path")
      ->required();
  eval->add_option("--dims", flags.dims, "comma-separated eval dims");

  CLI::App* mine = app.add_subcommand("mine", "mine hard negatives");
  add_common(mine, true);
  mine->add_option("--checkpoint", flags.checkpoint,
                   "encoder checkpoint (seeded random params when absent)");

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic data");
  add_common(synth, true);
  synth->add_option("--phase", flags.phase, "1 = topics, 2 = triplets")
      ->check(CLI::Range(1, 2));
  synth->add_flag("--mock", flags.mock, "use the offline mock client");
  synth->add_option("--fixture", flags.fixture, "mock fixture file");
  synth->add_option("--endpoint", flags.endpoint, "chat-completion endpoint URL");
  synth->add_option("--topics", flags.topics_path, "topics file (phase 2)");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--seed", flags.seed, "seed override")
      ->each([&](const std::string&) { flags.seed_set = true; });

  CLI::App* reformat =
      app.add_subcommand("reformat", "convert (text,label) JSONL to labeled schema");
  reformat->add_option("--in", flags.input, "input JSONL")->required();
  reformat->add_option("--out", flags.out_dir, "output directory");
  reformat->add_option("--task", flags.task, "classification or clustering");

  CLI::App* gentoy = app.add_subcommand("gen-toy", "generate the toy suite");
  gentoy->add_option("--out", flags.out_dir, "output directory");
  gentoy->add_option("--seed", flags.seed, "seed override")
      ->each([&](const std::string&) { flags.seed_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (train->parsed()) return cmd_train(flags);
    if (eval->parsed()) return cmd_eval(flags);
    if (mine->parsed()) return cmd_mine(flags);
    if (synth->parsed()) return cmd_synth(flags);
    if (gradcheck->parsed()) return cmd_gradcheck(flags);
    if (reformat->parsed()) return cmd_reformat(flags);
    if (gentoy->parsed()) return cmd_gen_toy(flags);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}

}  // namespace ember_cli
