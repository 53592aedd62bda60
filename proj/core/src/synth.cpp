#include "ember/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

using nlohmann::json;

const std::vector<std::string> kQueryTypes = {"extremely long-tail", "long-tail",
                                              "common"};
const std::vector<std::string> kQueryLengths = {"less than 5 words", "5 to 15 words",
                                                "at least 10 words"};
const std::vector<std::string> kClarities = {"clear", "understandable with some effort",
                                             "ambiguous"};
const std::vector<int> kNumWords = {50, 100, 200, 300, 400, 500};
const std::vector<std::string> kDifficulties = {"high school", "college", "PhD"};

std::string build_phase1_prompt(const std::string& example_task_1,
                                const std::string& example_task_2,
                                std::size_t num) {
  std::string p;
  p += "Brainstorm a list of potentially useful text retrieval tasks. Here are a few examples for your reference:\n";
  p += "- " + example_task_1 + "\n";
  p += "- " + example_task_2 + "\n";
  p += "Please adhere to the following guidelines:\n";
  p += "- Specify what the text is, and what the desired documents are.\n";
  p += "- Each retrieval task should cover a wide range of queries, and should not be too specific.\n";
  p += "Your output must always be string, the string is a json dict start with { and ends with }, the key is 'tasks', and the value is a list of strings only, with about " +
       std::to_string(num) +
       " elements, and each element corresponds to a distinct retrieval task in one sentence. Do not explain yourself or output anything else. Be creative!";
  return p;
}

std::string build_phase2_prompt(const std::string& task, const SynthParams& params) {
  std::string p;
  p += "You have been assigned a retrieval task: " + task + "\n";
  p += "Your mission is to write one text retrieval example for this task in JSON format. The JSON object must contain the following keys:\n";
  p += "- 'user_query': a string, a random user search query specified by the retrieval task.\n";
  p += "- 'positive_document': a string, a relevant document for the user query.\n";
  p += "- 'hard_negative_document': a string, a hard negative document that only appears relevant to the query.\n";
  p += "Please adhere to the following guidelines:\n";
  p += "- The 'user_query' should be " + params.query_type + ", " + params.query_length +
       ", " + params.clarity + ", and diverse in topic.\n";
  p += "- All documents must be created independent of the query. Avoid copying the query verbatim. It's acceptable if some parts of the 'positive_document' are not topically related to the query.\n";
  p += "- All documents should be at least " + std::to_string(params.num_words) +
       " words long.\n";
  p += "- The 'hard_negative_document' contains some useful information, but it should be less useful or comprehensive compared to the 'positive_document'.\n";
  p += "- Both the query and documents should be in " + params.language + ".\n";
  p += "- Do not provide any explanation in any document on why it is relevant or not relevant to the query.\n";
  p += "- Both the query and documents require " + params.difficulty +
       " level education to understand.\n";
  p += "Your output must always be a JSON object only, do not explain yourself or output anything else. Be creative!";
  return p;
}

SynthParams sample_params(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5a17));
  SynthParams out;
  out.query_type = kQueryTypes[bounded(rng, kQueryTypes.size())];
  out.query_length = kQueryLengths[bounded(rng, kQueryLengths.size())];
  out.clarity = kClarities[bounded(rng, kClarities.size())];
  out.num_words = kNumWords[bounded(rng, kNumWords.size())];
  out.difficulty = kDifficulties[bounded(rng, kDifficulties.size())];
  return out;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::uint64_t request_hash(const LLMRequest& request) {
  std::uint64_t h = 14695981039346656037ULL;
  h = fnv1a(h, request.prompt);
  h ^= 0x1f;
  h *= 1099511628211ULL;
  h = fnv1a(h, request.model);
  return h;
}

std::string request_hash_hex(const LLMRequest& request) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(request_hash(request)));
  return std::string(buf);
}

HttpLLMClient::HttpLLMClient(std::string endpoint, RetryPolicy retry)
    : retry_(retry) {
  if (endpoint.empty()) throw Error(ErrorCode::config_error, "empty endpoint");
  auto scheme_end = endpoint.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = endpoint.find('/', host_start);
  if (path_start == std::string::npos) {
    scheme_host_ = endpoint;
    path_ = "/";
  } else {
    scheme_host_ = endpoint.substr(0, path_start);
    path_ = endpoint.substr(path_start);
  }
  if (const char* key = std::getenv("SYNTH_API_KEY")) api_key_ = key;
}

LLMResponse HttpLLMClient::complete(const LLMRequest& request) {
  if (request.prompt.empty())
    throw Error(ErrorCode::config_error, "empty prompt");
  json body = {
      {"model", request.model},
      {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  const std::string payload = body.dump();

  int last_status = 0;
  for (int attempt = 0; attempt < retry_.attempts; ++attempt) {
    if (attempt > 0) {
      auto delay = retry_.base_delay_ms * (1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    httplib::Client cli(scheme_host_);
    cli.set_connection_timeout(10, 0);
    cli.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_status = 0;  // connection-level failure; retry
      continue;
    }
    last_status = res->status;
    if (res->status == 401 || res->status == 403)
      throw Error(ErrorCode::auth_error,
                  "authentication rejected (status " + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500) continue;  // transient
    if (res->status != 200)
      throw Error(ErrorCode::service_error,
                  "unexpected status " + std::to_string(res->status));
    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::service_error,
                  std::string("malformed completion body: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty())
      throw Error(ErrorCode::service_error, "completion body missing choices");
    const json& choice = parsed["choices"][0];
    LLMResponse out;
    if (choice.contains("message") && choice["message"].contains("content"))
      out.text = choice["message"]["content"].get<std::string>();
    else
      throw Error(ErrorCode::service_error, "choice missing message content");
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string())
      out.finish = choice["finish_reason"].get<std::string>();
    return out;
  }
  if (last_status == 429)
    throw Error(ErrorCode::rate_limited, "rate limited after retries");
  if (last_status == 0)
    throw Error(ErrorCode::timeout, "endpoint unreachable after retries");
  throw Error(ErrorCode::service_error,
              "service failed after retries (status " + std::to_string(last_status) + ")");
}

MockLLMClient::MockLLMClient(const std::string& fixture_path) {
  std::ifstream in(fixture_path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open fixture: " + fixture_path);
  json fixtures;
  try {
    in >> fixtures;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse_error,
                std::string("fixture is not valid JSON: ") + e.what());
  }
  if (!fixtures.is_object())
    throw Error(ErrorCode::schema_error, "fixture must be a JSON object");
  for (auto& [key, value] : fixtures.items()) {
    if (!value.is_string())
      throw Error(ErrorCode::schema_error, "fixture values must be strings");
    fixtures_[key] = value.get<std::string>();
  }
}

namespace {

const char* kFillerWords[] = {
    "analysis",  "background", "context",  "detail",   "evidence", "figure",
    "guidance",  "history",    "insight",  "judgment", "knowledge", "layout",
    "method",    "notion",     "outline",  "pattern",  "question", "result",
    "summary",   "theory",     "usage",    "variant",  "workflow", "example",
};
constexpr std::size_t kFillerCount = sizeof(kFillerWords) / sizeof(kFillerWords[0]);

std::string synth_document(Rng& rng, const std::string& topic, int num_words) {
  std::string doc = topic;
  int have = 1;
  for (char c : topic)
    if (c == ' ') ++have;
  while (have < num_words) {
    doc += ' ';
    doc += kFillerWords[bounded(rng, kFillerCount)];
    ++have;
  }
  return doc;
}

/// Pulls "at least N words long" out of a phase-2 prompt; 0 if absent.
int parse_num_words(const std::string& prompt) {
  const std::string tag = "at least ";
  const std::string suffix = " words long";
  auto pos = prompt.find(suffix);
  if (pos == std::string::npos) return 0;
  auto start = prompt.rfind(tag, pos);
  if (start == std::string::npos) return 0;
  start += tag.size();
  int value = 0;
  while (start < pos && std::isdigit(static_cast<unsigned char>(prompt[start]))) {
    value = value * 10 + (prompt[start] - '0');
    ++start;
  }
  return value;
}

/// Pulls "about N elements" out of a phase-1 prompt; 8 if absent.
std::size_t parse_num_topics(const std::string& prompt) {
  const std::string tag = "about ";
  auto start = prompt.find(tag);
  if (start == std::string::npos) return 8;
  start += tag.size();
  std::size_t value = 0;
  while (start < prompt.size() &&
         std::isdigit(static_cast<unsigned char>(prompt[start]))) {
    value = value * 10 + static_cast<std::size_t>(prompt[start] - '0');
    ++start;
  }
  return value == 0 ? 8 : value;
}

std::string extract_topic(const std::string& prompt) {
  const std::string tag = "retrieval task: ";
  auto start = prompt.find(tag);
  if (start == std::string::npos) return "general knowledge";
  start += tag.size();
  auto end = prompt.find('\n', start);
  if (end == std::string::npos) end = prompt.size();
  return prompt.substr(start, end - start);
}

std::string fallback_completion(const LLMRequest& request) {
  const std::uint64_t h = request_hash(request);
  Rng rng(mix_seed(h, 0xfa11bac));
  if (request.prompt.rfind("Brainstorm", 0) == 0) {
    const std::size_t n = parse_num_topics(request.prompt);
    json tasks = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      std::string phrase = "Retrieve ";
      phrase += kFillerWords[bounded(rng, kFillerCount)];
      phrase += " documents about ";
      phrase += kFillerWords[bounded(rng, kFillerCount)];
      phrase += " topic " + std::to_string(i + 1);
      tasks.push_back(phrase);
    }
    return json{{"tasks", tasks}}.dump();
  }
  const std::string topic = extract_topic(request.prompt);
  int num_words = parse_num_words(request.prompt);
  if (num_words <= 0) num_words = 50;
  json out = {
      {"user_query", "what to know about " + topic},
      {"positive_document", synth_document(rng, topic, num_words)},
      {"hard_negative_document",
       synth_document(rng, "regarding " + topic + " partially", num_words)},
  };
  std::string body = out.dump();
  if ((h >> 3) & 1) return "```json\n" + body + "\n```";
  return body;
}

}  // namespace

LLMResponse MockLLMClient::complete(const LLMRequest& request) {
  if (request.prompt.empty())
    throw Error(ErrorCode::config_error, "empty prompt");
  auto it = fixtures_.find(request_hash_hex(request));
  if (it != fixtures_.end()) return LLMResponse{it->second, "stop"};
  return LLMResponse{fallback_completion(request), "stop"};
}

namespace {

std::string strip_code_fences(const std::string& raw) {
  std::size_t begin = 0, end = raw.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string body = raw.substr(begin, end - begin);
  if (body.rfind("```", 0) == 0) {
    auto nl = body.find('\n');
    body = nl == std::string::npos ? std::string() : body.substr(nl + 1);
    auto tail = body.rfind("```");
    if (tail != std::string::npos) body = body.substr(0, tail);
    while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back())))
      body.pop_back();
  }
  return body;
}

std::size_t count_tokens(const std::string& text) {
  std::size_t n = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++n;
    }
  }
  return n;
}

std::string require_triplet_key(const json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string())
    throw Error(ErrorCode::missing_key, std::string("missing key: ") + key);
  return obj[key].get<std::string>();
}

}  // namespace

RetrievalExample parse_triplet(const std::string& raw, const SynthParams& params) {
  const std::string body = strip_code_fences(raw);
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::not_json, std::string("completion is not JSON: ") + e.what());
  }
  if (!parsed.is_object())
    throw Error(ErrorCode::not_json, "completion is not a JSON object");
  RetrievalExample out;
  out.query = require_triplet_key(parsed, "user_query");
  std::string pos = require_triplet_key(parsed, "positive_document");
  std::string neg = require_triplet_key(parsed, "hard_negative_document");
  const std::size_t min_tokens =
      static_cast<std::size_t>(0.5 * static_cast<double>(params.num_words));
  if (count_tokens(pos) < min_tokens)
    throw Error(ErrorCode::too_short, "positive_document too short");
  if (count_tokens(neg) < min_tokens)
    throw Error(ErrorCode::too_short, "hard_negative_document too short");
  out.pos.push_back(std::move(pos));
  out.neg.push_back(std::move(neg));
  return out;
}

std::vector<RetrievalExample> generate_triplets(
    const std::vector<std::string>& topics, const SynthConfig& config,
    LLMClient& client) {
  if (topics.empty()) throw Error(ErrorCode::empty_input, "no topics");
  if (config.generations_per_topic == 0)
    throw Error(ErrorCode::config_error, "generations_per_topic must be >= 1");

  struct Job {
    std::string prompt;
    SynthParams params;
  };
  std::vector<Job> jobs;
  jobs.reserve(topics.size() * config.generations_per_topic);
  for (std::size_t t = 0; t < topics.size(); ++t) {
    for (std::size_t g = 0; g < config.generations_per_topic; ++g) {
      const std::uint64_t salt =
          (static_cast<std::uint64_t>(t) << 32) | static_cast<std::uint64_t>(g);
      SynthParams params = sample_params(mix_seed(config.seed, salt));
      params.language = config.language;
      jobs.push_back({build_phase2_prompt(topics[t], params), params});
    }
  }

  std::vector<RetrievalExample> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure) return;
      }
      try {
        LLMRequest request{jobs[i].prompt, config.model, config.temperature,
                           config.max_tokens};
        LLMResponse response = client.complete(request);
        results[i] = parse_triplet(response.text, jobs[i].params);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::size_t n_threads = std::max<std::size_t>(1, config.max_in_flight);
  n_threads = std::min(n_threads, jobs.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

std::vector<std::string> generate_topics(const std::string& example_task_1,
                                         const std::string& example_task_2,
                                         std::size_t num,
                                         const SynthConfig& config,
                                         LLMClient& client) {
  if (num == 0) throw Error(ErrorCode::config_error, "num must be >= 1");
  LLMRequest request{build_phase1_prompt(example_task_1, example_task_2, num),
                     config.model, config.temperature, config.max_tokens};
  LLMResponse response = client.complete(request);
  const std::string body = strip_code_fences(response.text);
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::not_json, std::string("completion is not JSON: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("tasks") || !parsed["tasks"].is_array())
    throw Error(ErrorCode::missing_key, "missing key: tasks");
  std::vector<std::string> topics;
  for (const auto& item : parsed["tasks"]) {
    if (!item.is_string())
      throw Error(ErrorCode::schema_error, "tasks must be strings");
    topics.push_back(item.get<std::string>());
  }
  if (topics.empty()) throw Error(ErrorCode::empty_input, "no topics returned");
  return topics;
}

}  // namespace ember
