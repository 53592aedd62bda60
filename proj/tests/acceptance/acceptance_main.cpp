// Acceptance gate: nine release criteria, one PASS/FAIL line each, exit 0
// iff every criterion holds. Every numeric threshold is pinned right here so
// a reader can audit the gate without chasing constants through the library.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "ember/data.hpp"
#include "ember/encoder.hpp"
#include "ember/errors.hpp"
#include "ember/eval.hpp"
#include "ember/losses.hpp"
#include "ember/mining.hpp"
#include "ember/mrl.hpp"
#include "ember/numerics.hpp"
#include "ember/rng.hpp"
#include "ember/synth.hpp"
#include "ember/toygen.hpp"
#include "ember/trainer.hpp"

using namespace ember;

namespace {

// ---------------------------------------------------------------- thresholds

constexpr double kGradRelTol = 1e-4;         // 1: analytic vs finite diff
constexpr double kGradBudgetSec = 30.0;      // 1: runtime ceiling
constexpr int kGradBatches = 20;             // 1: seeded batches per loss
constexpr double kClosedFormTol = 1e-9;      // 2: |value - target|
constexpr double kOrderingGapPts = 2.0;      // 3: avg(Lc) - avg(La), points
constexpr double kOrderingBudgetSec = 600.0; // 3: runtime ceiling
constexpr double kTruncTotalDropPts = 3.0;   // 4: full dim -> smallest dim
constexpr double kTruncStepDropPts = 2.0;    // 4: each adjacent dim step
constexpr double kMrlVsSinglePts = 1.0;      // 5: |MRL - single-dim| at full
constexpr double kRecallFloor = 0.9;         // 8: recall@1 on toy retrieval
constexpr double kLossHalving = 0.5;         // 8: smoothed final vs initial
constexpr double kSanityBudgetSec = 120.0;   // 8: runtime ceiling

// Shared toy-run schedule for the ablation criteria (3, 4, 5). Short enough
// that nine runs fit the ten-minute budget with a wide margin.
constexpr std::uint64_t kAblationSteps = 240;
constexpr double kAblationLr = 0.02;

double now_sec() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ------------------------------------------------------------------ toy data

const char* kTrainFiles[] = {"train_retrieval.jsonl",      "train_reranking.jsonl",
                             "train_sts.jsonl",            "train_pair.jsonl",
                             "train_classification.jsonl", "train_clustering.jsonl"};
const char* kEvalFiles[] = {"eval_retrieval.jsonl",      "eval_reranking.jsonl",
                            "eval_sts.jsonl",            "eval_pair.jsonl",
                            "eval_classification.jsonl", "eval_clustering.jsonl"};

struct ToySuite {
  std::vector<TaskDataset> train;
  std::vector<EvalDataset> eval;
};

// Loads the suite shipped under data/toy and verifies it is byte-identical
// to regenerating with the pinned default seed, i.e. the files in the repo
// really are the seeded generator's output.
const ToySuite& toy_suite() {
  static ToySuite suite = [] {
    const std::string dir = EMBER_TOY_DATA_DIR;
    std::map<std::string, std::string> regenerated;
    for (const GeneratedFile& f : generate_toy_suite(ToyConfig{}))
      regenerated[f.name] = f.jsonl;
    ToySuite s;
    for (const char* name : kTrainFiles) {
      if (read_file(dir + "/" + name) != regenerated.at(name))
        throw Error(ErrorCode::config_error,
                    std::string(name) + " differs from the seeded generator");
      s.train.push_back(load_jsonl(dir + "/" + name));
    }
    for (const char* name : kEvalFiles) {
      if (read_file(dir + "/" + name) != regenerated.at(name))
        throw Error(ErrorCode::config_error,
                    std::string(name) + " differs from the seeded generator");
      s.eval.push_back(load_eval_jsonl(dir + "/" + name));
    }
    return s;
  }();
  return suite;
}

TrainConfig ablation_config(LossVariant variant, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.variant = variant;
  cfg.seed = seed;
  cfg.steps = kAblationSteps;
  cfg.lr = kAblationLr;
  return cfg;
}

double sixtask_average(const Checkpoint& ckpt, std::size_t dim) {
  return 100.0 *
         eval_all(ckpt.params, ckpt.encoder, toy_suite().eval, dim, 0).average;
}

// The MRL-trained reference model shared by criteria 4, 5 and 9.
const TrainResult& mrl_model() {
  static TrainResult result =
      train(toy_suite().train, EncoderConfig{}, ablation_config(LossVariant::lc, 1));
  return result;
}

// --------------------------------------------------- finite-difference rigs

Vec random_vec(Rng& rng, std::size_t dim) {
  Vec v(dim);
  for (double& x : v) x = uniform_real(rng, -1.0, 1.0);
  return v;
}

// Gathers every batch embedding into one flat vector and rebuilds the batch
// from a perturbed copy, so finite differences can sweep all coordinates.
struct FdRig {
  std::vector<double> flat;
  std::function<double(const Vec&)> value;     // loss at a flat point
  std::function<std::vector<Vec>()> analytic;  // grads at the base point
};

std::vector<double> pack(const std::vector<const Vec*>& slots) {
  std::vector<double> flat;
  for (const Vec* v : slots) flat.insert(flat.end(), v->begin(), v->end());
  return flat;
}

template <typename Batch, typename LossFn>
FdRig make_rig(const Batch& base, std::size_t dim, LossFn loss_fn) {
  auto rebuild = [base, dim](const Vec& flat) {
    Batch b = base;
    std::vector<const Vec*> slots = flatten(b);
    std::size_t at = 0;
    for (const Vec* v : slots) {
      Vec* mut = const_cast<Vec*>(v);
      for (std::size_t k = 0; k < dim; ++k) (*mut)[k] = flat[at++];
    }
    return b;
  };
  FdRig rig;
  rig.flat = pack(flatten(base));
  rig.value = [rebuild, loss_fn](const Vec& flat) {
    return loss_fn(rebuild(flat)).value;
  };
  rig.analytic = [base, loss_fn]() { return loss_fn(base).grads; };
  return rig;
}

double max_grad_err(const FdRig& rig) {
  const std::vector<Vec> grads = rig.analytic();
  const Vec numeric = finite_diff_grad(rig.value, Vec(rig.flat.begin(), rig.flat.end()));
  std::vector<double> flat_analytic;
  for (const Vec& g : grads)
    flat_analytic.insert(flat_analytic.end(), g.begin(), g.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < numeric.size(); ++k)
    worst = std::max(worst, rel_error(flat_analytic[k], numeric[k]));
  return worst;
}

RetrievalBatch random_retrieval(Rng& rng, std::size_t rows, std::size_t negs,
                                std::size_t dim) {
  RetrievalBatch b;
  for (std::size_t i = 0; i < rows; ++i) {
    b.queries.push_back(random_vec(rng, dim));
    b.positives.push_back(random_vec(rng, dim));
    std::vector<Vec> hn;
    for (std::size_t j = 0; j < negs; ++j) hn.push_back(random_vec(rng, dim));
    b.hard_negatives.push_back(hn);
  }
  return b;
}

ScoredPairBatch random_scored(Rng& rng, std::size_t rows, std::size_t dim) {
  ScoredPairBatch b;
  for (std::size_t i = 0; i < rows; ++i) {
    b.lefts.push_back(random_vec(rng, dim));
    b.rights.push_back(random_vec(rng, dim));
    b.scores.push_back(static_cast<double>(bounded(rng, 4)));
  }
  return b;
}

LabeledBatch random_labeled(Rng& rng, std::size_t rows, std::size_t negs,
                            std::size_t dim) {
  LabeledBatch b;
  for (std::size_t i = 0; i < rows; ++i) {
    b.texts.push_back(random_vec(rng, dim));
    b.pos_labels.push_back(random_vec(rng, dim));
    std::vector<Vec> nl;
    for (std::size_t j = 0; j < negs; ++j) nl.push_back(random_vec(rng, dim));
    b.neg_labels.push_back(nl);
  }
  return b;
}

// ----------------------------------------------------------------- criteria

struct Outcome {
  bool ok = false;
  std::string detail;
};

Outcome criterion_gradients() {
  const double t0 = now_sec();
  const std::size_t dim = 8;
  const double tau = 0.05;
  double worst = 0.0;
  for (int i = 0; i < kGradBatches; ++i) {
    Rng rng(mix_seed(0xacce97, static_cast<std::uint64_t>(i)));
    const RetrievalBatch rb = random_retrieval(rng, 3, 2, dim);
    worst = std::max(worst, max_grad_err(make_rig(rb, dim, [tau](const RetrievalBatch& b) {
                       return info_nce(b, tau, true);
                     })));
    const ScoredPairBatch sb = random_scored(rng, 4, dim);
    worst = std::max(worst, max_grad_err(make_rig(sb, dim, [tau](const ScoredPairBatch& b) {
                       return cosent(b, tau);
                     })));
    const LabeledBatch lb = random_labeled(rng, 3, 3, dim);
    worst = std::max(worst, max_grad_err(make_rig(lb, dim, [tau](const LabeledBatch& b) {
                       return label_nce(b, tau);
                     })));
    const MRLConfig mrl{{2, 4, 8}, {1.0, 1.0, 1.0}};
    const LossConfig loss_cfg;
    worst = std::max(worst,
                     max_grad_err(make_rig(rb, dim, [&](const RetrievalBatch& b) {
                       return mrl_loss(Task::retrieval, LossBatch(b), mrl, loss_cfg);
                     })));
  }
  const double elapsed = now_sec() - t0;
  const bool ok = worst < kGradRelTol && elapsed < kGradBudgetSec;
  return {ok, fmt("max rel err %.2e over 20 batches x 4 losses, %.1f s", worst,
                  elapsed)};
}

Outcome criterion_closed_forms() {
  const double tau = 0.05;

  // Positive and negative at identical cosine: ln 2 regardless of tau.
  RetrievalBatch rb;
  rb.queries = {Vec{1.0, 0.0}};
  rb.positives = {Vec{0.8, 0.6}};
  rb.hard_negatives = {{Vec{0.4, 0.3}}};  // same direction, same cosine
  const double sym = info_nce(rb, tau, false).value;

  // One text against its label plus nine same-cosine decoys: ln 10.
  LabeledBatch lb;
  lb.texts = {Vec{1.0, 0.0}};
  lb.pos_labels = {Vec{0.6, 0.8}};
  std::vector<Vec> decoys;
  for (int i = 1; i <= 9; ++i)
    decoys.push_back(Vec{0.6 * i, 0.8 * i});  // scaled copies, equal cosine
  lb.neg_labels = {decoys};
  const double tenway = label_nce(lb, tau).value;

  // All gold scores tied: no ordered tuples, exactly zero.
  ScoredPairBatch tied;
  tied.lefts = {Vec{1.0, 0.0}, Vec{0.0, 1.0}, Vec{1.0, 1.0}};
  tied.rights = {Vec{0.5, 0.5}, Vec{0.25, 0.5}, Vec{1.0, 0.0}};
  tied.scores = {3.0, 3.0, 3.0};
  const double zero = cosent(tied, tau).value;

  // One ordered tuple whose pair cosines match: ln(1 + e^0) = ln 2.
  ScoredPairBatch single;
  single.lefts = {Vec{1.0, 0.0}, Vec{0.0, 2.0}};
  single.rights = {Vec{3.0, 0.0}, Vec{0.0, 0.5}};  // both cosines are 1
  single.scores = {0.0, 1.0};
  const double lntwo = cosent(single, tau).value;

  const double ln2 = std::log(2.0), ln10 = std::log(10.0);
  const bool ok = std::abs(sym - ln2) <= kClosedFormTol &&
                  std::abs(tenway - ln10) <= kClosedFormTol && zero == 0.0 &&
                  std::abs(lntwo - ln2) <= kClosedFormTol;
  return {ok, fmt("ln2 err %.1e, ln10 err %.1e, tied cosent %.1f",
                  std::abs(sym - ln2), std::abs(tenway - ln10), zero)};
}

Outcome criterion_variant_ordering() {
  const double t0 = now_sec();
  int ordered_seeds = 0;
  double min_gap = 1e9, max_gap = -1e9;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    double avg[3];
    const LossVariant variants[] = {LossVariant::la, LossVariant::lb,
                                    LossVariant::lc};
    for (int v = 0; v < 3; ++v) {
      const TrainResult r =
          train(toy_suite().train, EncoderConfig{}, ablation_config(variants[v], seed));
      avg[v] = sixtask_average(r.checkpoint, r.checkpoint.encoder.out_dim);
    }
    const double gap = avg[2] - avg[0];
    min_gap = std::min(min_gap, gap);
    max_gap = std::max(max_gap, gap);
    if (avg[2] > avg[1] && avg[1] > avg[0] && gap >= kOrderingGapPts)
      ++ordered_seeds;
  }
  const double elapsed = now_sec() - t0;
  const bool ok = ordered_seeds >= 2 && elapsed < kOrderingBudgetSec;
  return {ok, fmt("Lc>Lb>La with gap>=2 pts on %.0f/3 seeds (Lc-La in "
                  "[%.1f, %.1f] pts), ",
                  static_cast<double>(ordered_seeds), min_gap, max_gap) +
                  fmt("%.0f s", elapsed)};
}

Outcome criterion_mrl_truncation() {
  const std::size_t dims[] = {16, 32, 64, 128};
  double avg[4];
  for (int i = 0; i < 4; ++i)
    avg[i] = sixtask_average(mrl_model().checkpoint, dims[i]);
  const double total_drop = avg[3] - avg[0];
  bool steps_ok = true;
  for (int i = 3; i > 0; --i)
    if (avg[i] - avg[i - 1] >= kTruncStepDropPts) steps_ok = false;
  const bool ok = total_drop <= kTruncTotalDropPts && steps_ok;
  return {ok, fmt("avgs 16:%.1f 32:%.1f 64:%.1f", avg[0], avg[1], avg[2]) +
                  fmt(" 128:%.1f, full->16 drop %.2f pts", avg[3], total_drop)};
}

Outcome criterion_mrl_vs_single() {
  TrainConfig single_cfg = ablation_config(LossVariant::lc, 1);
  single_cfg.mrl.dims = {128};
  single_cfg.mrl.weights = {1.0};
  const TrainResult single = train(toy_suite().train, EncoderConfig{}, single_cfg);
  const double mrl_avg = sixtask_average(mrl_model().checkpoint, 128);
  const double single_avg = sixtask_average(single.checkpoint, 128);
  const double diff = std::abs(mrl_avg - single_avg);
  const bool ok = diff <= kMrlVsSinglePts;
  return {ok, fmt("MRL %.2f vs single-dim %.2f at full dim, |diff| %.2f pts",
                  mrl_avg, single_avg, diff)};
}

Outcome criterion_mining_contract() {
  // Deterministic 200-document world; ten queries whose gold documents sit
  // in the corpus verbatim.
  std::vector<std::string> corpus;
  for (int i = 0; i < 200; ++i)
    corpus.push_back("document number " + std::to_string(i) + " about subject " +
                     std::to_string(i % 23));
  std::vector<RetrievalExample> examples;
  for (int q = 0; q < 10; ++q) {
    RetrievalExample ex;
    ex.query = "subject " + std::to_string(q);
    ex.pos = {corpus[static_cast<std::size_t>(q)]};
    examples.push_back(ex);
  }
  EncoderConfig enc;
  enc.vocab_size = 512;
  enc.hidden_dim = 16;
  enc.out_dim = 16;
  const EncoderParams params = random_params(enc, 99);
  MiningConfig mcfg;  // rank window [50, 100], 15 samples
  mcfg.seed = 123;

  const std::vector<RetrievalExample> mined =
      mine_dataset(examples, corpus, params, enc, mcfg);
  const std::vector<RetrievalExample> again =
      mine_dataset(examples, corpus, params, enc, mcfg);

  // Independent rank check: re-embed, re-rank, and look negatives up by text.
  std::map<std::string, std::size_t> index_of;
  std::vector<Vec> corpus_embs;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    index_of[corpus[i]] = i;
    corpus_embs.push_back(embed_text(corpus[i], params, enc));
  }
  bool window_ok = true, count_ok = true, gold_ok = true, stable_ok = true;
  for (std::size_t q = 0; q < mined.size(); ++q) {
    const std::vector<std::size_t> ranked =
        rank_corpus(embed_text(examples[q].query, params, enc), corpus_embs);
    std::vector<std::size_t> rank_of(corpus.size());
    for (std::size_t p = 0; p < ranked.size(); ++p) rank_of[ranked[p]] = p + 1;
    if (mined[q].neg.size() != mcfg.samples_per_query) count_ok = false;
    for (const std::string& neg : mined[q].neg) {
      const std::size_t rank = rank_of[index_of.at(neg)];
      if (rank < mcfg.rank_lo || rank > mcfg.rank_hi) window_ok = false;
      if (neg == examples[q].pos[0]) gold_ok = false;
    }
    if (mined[q].neg != again[q].neg) stable_ok = false;
  }
  const bool ok = window_ok && count_ok && gold_ok && stable_ok;
  std::string detail = "ranks in [50,100]: ";
  detail += window_ok ? "yes" : "NO";
  detail += ", 15/query: ";
  detail += count_ok ? "yes" : "NO";
  detail += ", gold leaked: ";
  detail += gold_ok ? "none" : "YES";
  detail += ", rerun identical: ";
  detail += stable_ok ? "yes" : "NO";
  return {ok, detail};
}

Outcome criterion_synthesis() {
  // Prompt templates must match the checked-in golden bytes.
  const std::string t1 =
      "Provided a scientific claim as query, retrieve documents that help "
      "verify or refute the claim.";
  const std::string t2 =
      "Search for documents that answers a FAQ-style query on children's "
      "nutrition.";
  const std::string golden_dir = EMBER_TEST_GOLDEN_DIR;
  const bool p1_ok = build_phase1_prompt(t1, t2, 20) ==
                     read_file(golden_dir + "/phase1_prompt.txt");
  const bool p2_ok =
      build_phase2_prompt("Retrieve news articles that discuss a named weather event",
                          SynthParams{}) ==
      read_file(golden_dir + "/phase2_prompt.txt");

  // Offline two-phase pipeline: 3 topics x 10 generations.
  MockLLMClient mock;
  SynthConfig scfg;
  scfg.seed = 5;
  scfg.generations_per_topic = 10;
  const std::vector<std::string> topics = generate_topics(t1, t2, 3, scfg, mock);
  const std::vector<RetrievalExample> triplets =
      generate_triplets(topics, scfg, mock);

  // Schema validity: serialize and push every line through the strict loader.
  const std::string tmp =
      "/tmp/ember_acceptance_synth_" + std::to_string(::getpid()) + ".jsonl";
  {
    std::ofstream out(tmp);
    for (const RetrievalExample& ex : triplets)
      out << to_jsonl_line(Task::retrieval, ex) << "\n";
  }
  const TaskDataset loaded = load_jsonl(tmp);
  std::remove(tmp.c_str());

  const bool ok = p1_ok && p2_ok && topics.size() == 3 &&
                  triplets.size() == 30 && loaded.task == Task::retrieval &&
                  loaded.examples.size() == 30;
  std::string detail = "prompts byte-identical: ";
  detail += (p1_ok && p2_ok) ? "yes" : "NO";
  detail += fmt(", %.0f topics -> %.0f schema-valid triplets",
                static_cast<double>(topics.size()),
                static_cast<double>(loaded.examples.size()));
  return {ok, detail};
}

Outcome criterion_training_sanity() {
  const double t0 = now_sec();
  TrainConfig cfg;  // desk defaults: lr 1e-2, 500 steps, batch 32, variant lc
  cfg.seed = 1;
  const std::vector<TaskDataset> retrieval_only = {toy_suite().train[0]};
  const TrainResult run = train(retrieval_only, EncoderConfig{}, cfg);
  const double elapsed = now_sec() - t0;

  // recall@1 against the shipped retrieval eval at full dimension.
  const EvalDataset& retr = toy_suite().eval[0];
  const RetrievalEvalData& data = std::get<RetrievalEvalData>(retr.data);
  std::vector<Vec> doc_embs;
  for (const std::string& doc : data.docs)
    doc_embs.push_back(embed_text(doc, run.checkpoint.params, run.checkpoint.encoder));
  std::size_t hits = 0;
  for (const auto& query : data.queries) {
    const std::vector<std::size_t> ranked = rank_corpus(
        embed_text(query.text, run.checkpoint.params, run.checkpoint.encoder),
        doc_embs);
    for (std::size_t rel : query.relevant)
      if (!ranked.empty() && ranked[0] == rel) {
        ++hits;
        break;
      }
  }
  const double recall = static_cast<double>(hits) /
                        static_cast<double>(data.queries.size());

  // Smoothed loss: mean of the first and last 50 logged steps.
  auto window_mean = [&](std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += run.log[i].loss;
    return sum / static_cast<double>(end - begin);
  };
  const double first = window_mean(0, 50);
  const double last = window_mean(run.log.size() - 50, run.log.size());

  // Bit-determinism of the loss log under the same seed.
  const TrainResult rerun = train(retrieval_only, EncoderConfig{}, cfg);
  const bool deterministic =
      render_loss_csv(run.log) == render_loss_csv(rerun.log);

  const bool ok = recall > kRecallFloor && last < kLossHalving * first &&
                  deterministic && elapsed < kSanityBudgetSec;
  return {ok, fmt("recall@1 %.3f, smoothed loss %.4f -> %.4f", recall, first,
                  last) +
                  (deterministic ? ", deterministic" : ", NON-DETERMINISTIC") +
                  fmt(", %.0f s", elapsed)};
}

Outcome criterion_checkpoint_roundtrip() {
  const Checkpoint& before = mrl_model().checkpoint;
  const std::string tmp =
      "/tmp/ember_acceptance_ckpt_" + std::to_string(::getpid()) + ".pic2";
  save_checkpoint(before, tmp);
  const Checkpoint after = load_checkpoint(tmp);
  std::remove(tmp.c_str());

  bool identical = true;
  int compared = 0;
  for (std::size_t dim : {16, 128}) {
    const EvalReport a =
        eval_all(before.params, before.encoder, toy_suite().eval, dim, 0);
    const EvalReport b =
        eval_all(after.params, after.encoder, toy_suite().eval, dim, 0);
    if (a.dataset_scores.size() != b.dataset_scores.size() ||
        a.task_scores.size() != b.task_scores.size())
      return {false, "report shapes differ after reload"};
    for (std::size_t i = 0; i < a.dataset_scores.size(); ++i, ++compared)
      if (a.dataset_scores[i].value != b.dataset_scores[i].value)
        identical = false;
    for (std::size_t i = 0; i < a.task_scores.size(); ++i, ++compared)
      if (a.task_scores[i].value != b.task_scores[i].value) identical = false;
    if (a.average != b.average) identical = false;
    ++compared;
  }
  return {identical, fmt("%.0f metrics bit-identical across save/load at dims "
                         "16 and 128",
                         static_cast<double>(compared))};
}

}  // namespace

int main() {
  struct Entry {
    const char* label;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {"gradient suite", criterion_gradients},
      {"closed-form loss values", criterion_closed_forms},
      {"loss-variant ordering", criterion_variant_ordering},
      {"MRL truncation degradation", criterion_mrl_truncation},
      {"MRL vs single-dim at full dim", criterion_mrl_vs_single},
      {"mining contract", criterion_mining_contract},
      {"synthesis pipeline with mock", criterion_synthesis},
      {"training sanity", criterion_training_sanity},
      {"checkpoint round-trip", criterion_checkpoint_roundtrip},
  };
  int failures = 0;
  for (int i = 0; i < 9; ++i) {
    Outcome outcome;
    try {
      outcome = entries[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.ok) ++failures;
    std::printf("%s criterion %d: %s (%s)\n", outcome.ok ? "PASS" : "FAIL",
                i + 1, entries[i].label, outcome.detail.c_str());
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d of 9 criteria FAILED\n", failures);
  return 1;
}
