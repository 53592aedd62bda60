#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ember/data.hpp"

namespace ember {

/// Randomized knobs of the triplet-generation prompt. Every field except
/// language is drawn from a closed set; language comes from configuration.
struct SynthParams {
  std::string query_type = "common";        // extremely long-tail | long-tail | common
  std::string query_length = "5 to 15 words";  // less than 5 words | 5 to 15 words | at least 10 words
  std::string clarity = "clear";            // clear | understandable with some effort | ambiguous
  int num_words = 50;                       // 50 | 100 | 200 | 300 | 400 | 500
  std::string difficulty = "college";       // high school | college | PhD
  std::string language = "English";
};

extern const std::vector<std::string> kQueryTypes;
extern const std::vector<std::string> kQueryLengths;
extern const std::vector<std::string> kClarities;
extern const std::vector<int> kNumWords;
extern const std::vector<std::string> kDifficulties;

/// Topic-brainstorm prompt; byte-stable for fixed inputs.
std::string build_phase1_prompt(const std::string& example_task_1,
                                const std::string& example_task_2,
                                std::size_t num);

/// Triplet-generation prompt for one topic; byte-stable for fixed inputs.
std::string build_phase2_prompt(const std::string& task, const SynthParams& params);

/// Uniform independent draw of each randomized field, deterministic under
/// the seed. language keeps its default and is overridden by the pipeline.
SynthParams sample_params(std::uint64_t seed);

struct LLMRequest {
  std::string prompt;
  std::string model = "gpt-4";
  double temperature = 1.0;
  int max_tokens = 4096;
};

struct LLMResponse {
  std::string text;
  std::string finish = "stop";
};

/// FNV-1a over prompt and model; keys mock fixtures.
std::uint64_t request_hash(const LLMRequest& request);
std::string request_hash_hex(const LLMRequest& request);

class LLMClient {
 public:
  virtual ~LLMClient() = default;
  virtual LLMResponse complete(const LLMRequest& request) = 0;
};

struct RetryPolicy {
  int attempts = 3;
  int base_delay_ms = 250;  // doubles per retry
};

/// Chat-completion client over HTTP. Endpoint is the full URL of the
/// completion route; the credential comes from the SYNTH_API_KEY
/// environment variable. Transient failures (429, 5xx, connection errors)
/// retry with exponential backoff.
class HttpLLMClient : public LLMClient {
 public:
  HttpLLMClient(std::string endpoint, RetryPolicy retry = {});
  LLMResponse complete(const LLMRequest& request) override;

 private:
  std::string scheme_host_;
  std::string path_;
  std::string api_key_;
  RetryPolicy retry_;
};

/// Offline stand-in: answers from a fixture file of canned responses keyed
/// by request hash (hex), falling back to a deterministic conforming
/// generator derived from the request hash. Safe for concurrent use.
class MockLLMClient : public LLMClient {
 public:
  MockLLMClient() = default;
  explicit MockLLMClient(const std::string& fixture_path);
  LLMResponse complete(const LLMRequest& request) override;

 private:
  std::map<std::string, std::string> fixtures_;
};

/// Validates a raw completion (code fences stripped) into a retrieval
/// example: query = user_query, pos = [positive_document],
/// neg = [hard_negative_document]. Documents shorter than half of
/// params.num_words (whitespace tokens) are rejected as TooShort.
RetrievalExample parse_triplet(const std::string& raw, const SynthParams& params);

struct SynthConfig {
  std::string model = "gpt-4";
  double temperature = 1.0;
  int max_tokens = 4096;
  std::string language = "English";
  std::size_t generations_per_topic = 10;
  std::size_t max_in_flight = 4;
  std::uint64_t seed = 0;
};

/// Phase 2 end to end: for every topic, generations_per_topic prompts with
/// fresh random parameters, completed through the client (up to
/// max_in_flight requests at once) and validated. Output order follows
/// (topic index, generation index).
std::vector<RetrievalExample> generate_triplets(
    const std::vector<std::string>& topics, const SynthConfig& config,
    LLMClient& client);

/// Phase 1: brainstorm `num` topic phrases from two example tasks.
std::vector<std::string> generate_topics(const std::string& example_task_1,
                                         const std::string& example_task_2,
                                         std::size_t num,
                                         const SynthConfig& config,
                                         LLMClient& client);

}  // namespace ember
