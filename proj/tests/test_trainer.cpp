#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "ember/data.hpp"
#include "ember/errors.hpp"
#include "ember/trainer.hpp"

using namespace ember;
using nlohmann::json;

namespace {

// 1x1x1 encoder so every optimizer slot is one scalar.
EncoderConfig unit_config() {
  EncoderConfig c;
  c.vocab_size = 1;
  c.hidden_dim = 1;
  c.out_dim = 1;
  c.ngram = 1;
  return c;
}

EncoderParams unit_params(double value) {
  EncoderParams p;
  p.embed_table = Mat(1, 1);
  p.embed_table(0, 0) = value;
  p.proj_weight = Mat(1, 1);
  p.proj_weight(0, 0) = value;
  p.proj_bias = {value};
  return p;
}

EncoderGrads unit_grads(double value) {
  EncoderGrads g;
  g.embed_table = Mat(1, 1);
  g.embed_table(0, 0) = value;
  g.proj_weight = Mat(1, 1);
  g.proj_weight(0, 0) = value;
  g.proj_bias = {value};
  return g;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

Checkpoint small_checkpoint() {
  Checkpoint ckpt;
  ckpt.encoder.vocab_size = 8;
  ckpt.encoder.hidden_dim = 3;
  ckpt.encoder.out_dim = 4;
  ckpt.encoder.ngram = 2;
  ckpt.encoder.hash_seed = 99;
  ckpt.mrl.dims = {2, 4};
  ckpt.mrl.weights = {1.0, 1.0};
  ckpt.step = 17;
  ckpt.loss_digest = "0123456789abcdef";
  ckpt.params = random_params(ckpt.encoder, 31);
  // Quantize to f32 so the round trip can be compared bit for bit.
  for (double& v : ckpt.params.embed_table.data) v = double(float(v));
  for (double& v : ckpt.params.proj_weight.data) v = double(float(v));
  for (double& v : ckpt.params.proj_bias) v = double(float(v));
  return ckpt;
}

std::vector<TaskDataset> tiny_datasets() {
  TaskDataset retrieval;
  retrieval.task = Task::retrieval;
  for (int i = 0; i < 8; ++i)
    retrieval.examples.push_back(RetrievalExample{
        "query about subject " + std::to_string(i),
        {"document describing subject " + std::to_string(i)},
        {"document describing subject " + std::to_string((i + 3) % 8)}});
  TaskDataset sts;
  sts.task = Task::sts;
  for (int i = 0; i < 6; ++i)
    sts.examples.push_back(ScoredExample{
        "sentence number " + std::to_string(i),
        "sentence number " + std::to_string(i % 3), double(i % 4)});
  return {retrieval, sts};
}

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.lr = 0.02;
  cfg.lr_min = 0.001;
  cfg.steps = 6;
  cfg.batch_size = 4;
  cfg.seed = 12;
  cfg.mrl.dims = {4, 8};
  cfg.mrl.weights = {1.0, 1.0};
  return cfg;
}

EncoderConfig tiny_encoder() {
  EncoderConfig enc;
  enc.vocab_size = 256;
  enc.hidden_dim = 8;
  enc.out_dim = 8;
  enc.ngram = 2;
  return enc;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("cosine_lr hits its endpoints and midpoint exactly") {
  CHECK(cosine_lr(0, 100, 0.1, 0.001) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(cosine_lr(100, 100, 0.1, 0.001) ==
        doctest::Approx(0.001).epsilon(1e-12));
  // cos(pi/2) = 0: the midpoint is the average of the extremes.
  CHECK(cosine_lr(50, 100, 0.1, 0.001) ==
        doctest::Approx((0.1 + 0.001) / 2.0).epsilon(1e-12));
  // Monotone decreasing across the schedule.
  double prev = cosine_lr(0, 10, 1.0, 0.0);
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const double cur = cosine_lr(s, 10, 1.0, 0.0);
    CHECK(cur < prev);
    prev = cur;
  }
  // Quarter point agrees with the closed form.
  const double want = 0.0 + 0.5 * (1.0 - 0.0) * (1.0 + std::cos(std::numbers::pi * 0.25));
  CHECK(cosine_lr(25, 100, 1.0, 0.0) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("adamw first step matches the hand-derived value") {
  // p = 1, g = 1, lr = 0.1, defaults beta1/beta2, no decay:
  // m-hat = v-hat = 1, so p' = 1 - 0.1 / (1 + eps) which is 0.9 up to eps.
  EncoderParams p = unit_params(1.0);
  OptimizerState state = init_optimizer(unit_config());
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  adamw_step(p, unit_grads(1.0), state, 0.1, cfg);
  CHECK(state.step == 1);
  CHECK(p.embed_table(0, 0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p.proj_weight(0, 0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p.proj_bias[0] == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("adamw decoupled decay alone shrinks parameters multiplicatively") {
  // Zero gradient, weight_decay = 0.1, lr = 0.1: p' = p - lr*wd*p = 0.99 p.
  EncoderParams p = unit_params(1.0);
  OptimizerState state = init_optimizer(unit_config());
  TrainConfig cfg;
  cfg.weight_decay = 0.1;
  adamw_step(p, unit_grads(0.0), state, 0.1, cfg);
  CHECK(p.embed_table(0, 0) == doctest::Approx(0.99).epsilon(1e-14));
  CHECK(p.proj_bias[0] == doctest::Approx(0.99).epsilon(1e-14));
}

TEST_CASE("adamw with lr = 0 leaves parameters untouched") {
  EncoderParams p = unit_params(0.75);
  OptimizerState state = init_optimizer(unit_config());
  TrainConfig cfg;
  adamw_step(p, unit_grads(2.0), state, 0.0, cfg);
  CHECK(p.embed_table(0, 0) == 0.75);
  CHECK(p.proj_weight(0, 0) == 0.75);
  CHECK(p.proj_bias[0] == 0.75);
  CHECK(state.step == 1);  // the step counter still advances
}

TEST_CASE("adamw second step uses accumulated moments") {
  // Two steps with constant gradient 1: m-hat and v-hat stay exactly 1
  // under bias correction, so each step subtracts lr/(1+eps).
  EncoderParams p = unit_params(1.0);
  OptimizerState state = init_optimizer(unit_config());
  TrainConfig cfg;
  cfg.weight_decay = 0.0;
  adamw_step(p, unit_grads(1.0), state, 0.1, cfg);
  adamw_step(p, unit_grads(1.0), state, 0.1, cfg);
  CHECK(state.step == 2);
  CHECK(p.proj_bias[0] == doctest::Approx(0.8).epsilon(1e-7));
}

TEST_CASE("render_loss_csv emits the pinned header and one row per step") {
  // Exactly representable doubles so the %.17g rendering stays short.
  std::vector<LossRow> log = {
      {1, Task::retrieval, 0.01, 2.5},
      {2, Task::sts, 0.0078125, 1.25},
  };
  const std::string csv = render_loss_csv(log);
  CHECK(csv.rfind("step,task,lr,loss\n", 0) == 0);
  CHECK(csv.find("1,retrieval,0.01,2.5") != std::string::npos);
  CHECK(csv.find("2,sts,0.0078125,1.25") != std::string::npos);
  // Exactly header + 2 rows.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("loss_log_digest is 16 hex chars and content-sensitive") {
  std::vector<LossRow> a = {{1, Task::retrieval, 0.01, 2.0}};
  std::vector<LossRow> b = {{1, Task::retrieval, 0.01, 2.0000001}};
  const std::string da = loss_log_digest(a);
  const std::string db = loss_log_digest(b);
  CHECK(da.size() == 16);
  CHECK(da.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(da != db);
  CHECK(da == loss_log_digest(a));
}

TEST_CASE("checkpoint round-trips bit for bit") {
  const Checkpoint ckpt = small_checkpoint();
  const std::string path = "/tmp/ember_ckpt_roundtrip.pic2";
  save_checkpoint(ckpt, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.encoder.vocab_size == ckpt.encoder.vocab_size);
  CHECK(back.encoder.hash_seed == ckpt.encoder.hash_seed);
  CHECK(back.mrl.dims == ckpt.mrl.dims);
  CHECK(back.step == 17);
  CHECK(back.loss_digest == ckpt.loss_digest);
  CHECK(back.params.embed_table.data == ckpt.params.embed_table.data);
  CHECK(back.params.proj_weight.data == ckpt.params.proj_weight.data);
  CHECK(back.params.proj_bias == ckpt.params.proj_bias);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint file starts with the PIC2 magic and version 1") {
  const Checkpoint ckpt = small_checkpoint();
  const std::string path = "/tmp/ember_ckpt_magic.pic2";
  save_checkpoint(ckpt, path);
  const std::string bytes = read_file(path);
  REQUIRE(bytes.size() > 12);
  CHECK(bytes.substr(0, 4) == "PIC2");
  // Little-endian u32 version = 1.
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);
  CHECK(static_cast<unsigned char>(bytes[5]) == 0);
  CHECK(static_cast<unsigned char>(bytes[6]) == 0);
  CHECK(static_cast<unsigned char>(bytes[7]) == 0);
  std::remove(path.c_str());
}

TEST_CASE("corrupted checkpoints fail with precise codes") {
  const Checkpoint ckpt = small_checkpoint();
  const std::string path = "/tmp/ember_ckpt_corrupt.pic2";
  save_checkpoint(ckpt, path);
  const std::string good = read_file(path);

  auto expect_code = [&](const std::string& bytes, ErrorCode want) {
    write_file(path, bytes);
    try {
      load_checkpoint(path);
      FAIL("expected an Error");
    } catch (const Error& e) {
      CHECK(e.code() == want);
    }
  };

  // Wrong magic.
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  expect_code(bad_magic, ErrorCode::bad_magic);

  // Future version.
  std::string bad_version = good;
  bad_version[4] = 2;
  expect_code(bad_version, ErrorCode::version_mismatch);

  // Cut in half: payload shorter than the header declares.
  expect_code(good.substr(0, good.size() / 2), ErrorCode::truncated_file);

  // Shorter than the 12-byte fixed header.
  expect_code(good.substr(0, 7), ErrorCode::truncated_file);

  // Trailing garbage: payload no longer matches the declared shapes.
  expect_code(good + std::string(4, '\0'), ErrorCode::header_shape_mismatch);

  // Header whose declared shape disagrees with its own encoder config.
  {
    json header = {
        {"encoder",
         {{"vocab_size", 8},
          {"hidden_dim", 3},
          {"out_dim", 4},
          {"ngram", 2},
          {"hash_seed", 99}}},
        {"mrl", {{"dims", {2, 4}}, {"weights", {1.0, 1.0}}}},
        {"step", 0},
        {"loss_digest", ""},
        {"arrays",
         json::array({json{{"name", "embed_table"}, {"rows", 7}, {"cols", 3}},
                      json{{"name", "proj_weight"}, {"rows", 3}, {"cols", 4}},
                      json{{"name", "proj_bias"}, {"rows", 1}, {"cols", 4}}})},
    };
    const std::string h = header.dump();
    std::string bytes = "PIC2";
    auto push_u32 = [&bytes](std::uint32_t v) {
      for (int i = 0; i < 4; ++i) bytes.push_back(char((v >> (8 * i)) & 0xff));
    };
    push_u32(1);
    push_u32(std::uint32_t(h.size()));
    bytes += h;
    bytes += std::string((7 * 3 + 3 * 4 + 4) * 4, '\0');
    expect_code(bytes, ErrorCode::header_shape_mismatch);
  }

  std::remove(path.c_str());
}

TEST_CASE("save_checkpoint leaves no temp file behind") {
  const Checkpoint ckpt = small_checkpoint();
  const std::string path = "/tmp/ember_ckpt_tmpcheck.pic2";
  save_checkpoint(ckpt, path);
  std::ifstream tmp(path + ".tmp");
  CHECK_FALSE(tmp.good());
  std::remove(path.c_str());
}

TEST_CASE("train produces one log row per step and a matching digest") {
  TrainResult result = train(tiny_datasets(), tiny_encoder(), tiny_train_config());
  CHECK(result.log.size() == 6);
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    CHECK(result.log[i].step == i + 1);  // 1-based
    CHECK(std::isfinite(result.log[i].loss));
    CHECK(result.log[i].lr > 0.0);
  }
  CHECK(result.checkpoint.step == 6);
  CHECK(result.checkpoint.loss_digest == loss_log_digest(result.log));
  // Learning rate follows the cosine schedule.
  TrainConfig cfg = tiny_train_config();
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    CHECK(result.log[i].lr ==
          doctest::Approx(cosine_lr(i, cfg.steps, cfg.lr, cfg.lr_min))
              .epsilon(1e-12));
  }
}

TEST_CASE("train with steps = 1 yields exactly one row") {
  TrainConfig cfg = tiny_train_config();
  cfg.steps = 1;
  const TrainResult result = train(tiny_datasets(), tiny_encoder(), cfg);
  CHECK(result.log.size() == 1);
  CHECK(result.checkpoint.step == 1);
}

TEST_CASE("train is bit-reproducible under a fixed seed") {
  const TrainResult a = train(tiny_datasets(), tiny_encoder(), tiny_train_config());
  const TrainResult b = train(tiny_datasets(), tiny_encoder(), tiny_train_config());
  CHECK(render_loss_csv(a.log) == render_loss_csv(b.log));
  CHECK(a.checkpoint.params.embed_table.data == b.checkpoint.params.embed_table.data);
  CHECK(a.checkpoint.params.proj_weight.data == b.checkpoint.params.proj_weight.data);
  CHECK(a.checkpoint.params.proj_bias == b.checkpoint.params.proj_bias);

  TrainConfig other = tiny_train_config();
  other.seed = 13;
  const TrainResult c = train(tiny_datasets(), tiny_encoder(), other);
  CHECK(render_loss_csv(a.log) != render_loss_csv(c.log));
}

TEST_CASE("returned checkpoint parameters are float-exact") {
  const TrainResult result =
      train(tiny_datasets(), tiny_encoder(), tiny_train_config());
  for (double v : result.checkpoint.params.embed_table.data)
    CHECK(v == double(float(v)));
  for (double v : result.checkpoint.params.proj_weight.data)
    CHECK(v == double(float(v)));
  for (double v : result.checkpoint.params.proj_bias)
    CHECK(v == double(float(v)));
}

TEST_CASE("loss trends down over a longer toy run") {
  TrainConfig cfg = tiny_train_config();
  cfg.steps = 120;
  cfg.lr = 0.05;
  const TrainResult result = train(tiny_datasets(), tiny_encoder(), cfg);
  REQUIRE(result.log.size() == 120);
  // Smooth with a trailing window against batch-to-batch noise.
  auto window_mean = [&](std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += result.log[i].loss;
    return s / double(end - begin);
  };
  CHECK(window_mean(100, 120) < 0.5 * window_mean(0, 20));
}

TEST_CASE("loss variants parse and route") {
  CHECK(variant_from_string("la") == LossVariant::la);
  CHECK(variant_from_string("lb") == LossVariant::lb);
  CHECK(variant_from_string("lc") == LossVariant::lc);
  CHECK(variant_name(LossVariant::lb) == "lb");
  CHECK_THROWS_AS(variant_from_string("ld"), Error);
}

TEST_CASE("every variant trains on the mixed toy datasets") {
  TaskDataset cls;
  cls.task = Task::classification;
  for (int i = 0; i < 6; ++i)
    cls.examples.push_back(LabeledExample{
        "classified text " + std::to_string(i),
        i % 2 ? "label one" : "label two",
        {i % 2 ? "label two" : "label one"}});
  std::vector<TaskDataset> datasets = tiny_datasets();
  datasets.push_back(cls);

  for (LossVariant v : {LossVariant::la, LossVariant::lb, LossVariant::lc}) {
    TrainConfig cfg = tiny_train_config();
    cfg.variant = v;
    cfg.steps = 4;
    const TrainResult result = train(datasets, tiny_encoder(), cfg);
    CHECK(result.log.size() == 4);
    for (const LossRow& row : result.log) CHECK(std::isfinite(row.loss));
  }
}

TEST_CASE("validate_train rejects broken configs") {
  TrainConfig cfg = tiny_train_config();
  cfg.lr = 0.0;
  CHECK_THROWS_AS(validate_train(cfg), Error);
  cfg = tiny_train_config();
  cfg.steps = 0;
  CHECK_THROWS_AS(validate_train(cfg), Error);
  cfg = tiny_train_config();
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(validate_train(cfg), Error);
  cfg = tiny_train_config();
  cfg.lr_min = cfg.lr * 2;  // floor above the peak
  CHECK_THROWS_AS(validate_train(cfg), Error);
}

}  // TEST_SUITE
