#include "ember/encoder.hpp"

#include <cctype>
#include <string>

#include "ember/errors.hpp"
#include "ember/rng.hpp"

namespace ember {

namespace {

constexpr std::size_t kMaxTokens = 512;

bool is_utf8_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Byte offsets where code points start; text is treated as UTF-8, stray
// bytes count as single code points.
std::vector<std::size_t> codepoint_starts(const std::string& text) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_utf8_continuation(static_cast<unsigned char>(text[i]))) {
      starts.push_back(i);
    }
  }
  return starts;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

void validate_config(const EncoderConfig& config) {
  if (config.vocab_size < 1 || config.hidden_dim < 1 || config.out_dim < 1) {
    throw Error(ErrorCode::config_error, "encoder dims must be >= 1");
  }
  if (config.ngram < 1 || config.ngram > 3) {
    throw Error(ErrorCode::config_error, "ngram must be 1, 2 or 3");
  }
}

std::uint64_t ngram_hash(const char* data, std::size_t len, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::size_t> tokenize(const std::string& text,
                                  const EncoderConfig& config) {
  validate_config(config);
  const std::string t = trim(text);
  if (t.empty()) {
    throw Error(ErrorCode::empty_text, "tokenize: empty text");
  }
  const std::vector<std::size_t> starts = codepoint_starts(t);
  std::vector<std::size_t> ids;
  if (starts.size() < config.ngram) {
    // Shorter than one n-gram: hash the whole text as a single token.
    ids.push_back(static_cast<std::size_t>(
        ngram_hash(t.data(), t.size(), config.hash_seed) % config.vocab_size));
    return ids;
  }
  const std::size_t count = starts.size() - config.ngram + 1;
  ids.reserve(std::min(count, kMaxTokens));
  for (std::size_t i = 0; i < count && ids.size() < kMaxTokens; ++i) {
    const std::size_t begin = starts[i];
    const std::size_t end =
        (i + config.ngram < starts.size()) ? starts[i + config.ngram] : t.size();
    ids.push_back(static_cast<std::size_t>(
        ngram_hash(t.data() + begin, end - begin, config.hash_seed) %
        config.vocab_size));
  }
  return ids;
}

EncodeTrace encode(const std::string& text, const EncoderParams& params,
                   const EncoderConfig& config) {
  EncodeTrace trace;
  trace.token_ids = tokenize(text, config);

  trace.pooled.assign(config.hidden_dim, 0.0);
  for (std::size_t id : trace.token_ids) {
    for (std::size_t h = 0; h < config.hidden_dim; ++h) {
      trace.pooled[h] += params.embed_table(id, h);
    }
  }
  const double inv = 1.0 / static_cast<double>(trace.token_ids.size());
  for (double& v : trace.pooled) v *= inv;

  trace.output.assign(config.out_dim, 0.0);
  for (std::size_t h = 0; h < config.hidden_dim; ++h) {
    const double p = trace.pooled[h];
    if (p == 0.0) continue;
    const double* wrow = &params.proj_weight.data[h * config.out_dim];
    for (std::size_t o = 0; o < config.out_dim; ++o) {
      trace.output[o] += p * wrow[o];
    }
  }
  for (std::size_t o = 0; o < config.out_dim; ++o) {
    trace.output[o] += params.proj_bias[o];
  }
  return trace;
}

EncoderGrads zero_grads(const EncoderConfig& config) {
  EncoderGrads g;
  g.embed_table = Mat(config.vocab_size, config.hidden_dim);
  g.proj_weight = Mat(config.hidden_dim, config.out_dim);
  g.proj_bias.assign(config.out_dim, 0.0);
  return g;
}

void encode_backward_into(const EncodeTrace& trace, const Vec& grad_output,
                          const EncoderParams& params, EncoderGrads& acc) {
  const std::size_t hidden = params.proj_weight.rows;
  const std::size_t out = params.proj_weight.cols;
  if (grad_output.size() != out || trace.pooled.size() != hidden) {
    throw Error(ErrorCode::shape_mismatch, "encode_backward: shape mismatch");
  }

  for (std::size_t o = 0; o < out; ++o) {
    acc.proj_bias[o] += grad_output[o];
  }

  Vec grad_pooled(hidden, 0.0);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double* wrow = &params.proj_weight.data[h * out];
    double* grow = &acc.proj_weight.data[h * out];
    const double p = trace.pooled[h];
    double gp = 0.0;
    for (std::size_t o = 0; o < out; ++o) {
      grow[o] += p * grad_output[o];
      gp += wrow[o] * grad_output[o];
    }
    grad_pooled[h] = gp;
  }

  const double inv = 1.0 / static_cast<double>(trace.token_ids.size());
  for (std::size_t id : trace.token_ids) {
    double* erow = &acc.embed_table.data[id * hidden];
    for (std::size_t h = 0; h < hidden; ++h) {
      erow[h] += grad_pooled[h] * inv;
    }
  }
}

EncoderGrads encode_backward(const EncodeTrace& trace, const Vec& grad_output,
                             const EncoderParams& params) {
  EncoderConfig shape;
  shape.vocab_size = params.embed_table.rows;
  shape.hidden_dim = params.embed_table.cols;
  shape.out_dim = params.proj_weight.cols;
  EncoderGrads acc = zero_grads(shape);
  encode_backward_into(trace, grad_output, params, acc);
  return acc;
}

EncoderParams random_params(const EncoderConfig& config, std::uint64_t seed) {
  validate_config(config);
  Rng rng(mix_seed(seed, 0xe2c0de));
  EncoderParams p;
  p.embed_table = Mat(config.vocab_size, config.hidden_dim);
  p.proj_weight = Mat(config.hidden_dim, config.out_dim);
  p.proj_bias.assign(config.out_dim, 0.0);
  for (double& v : p.embed_table.data) v = uniform_real(rng, -0.05, 0.05);
  for (double& v : p.proj_weight.data) v = uniform_real(rng, -0.05, 0.05);
  for (double& v : p.proj_bias) v = uniform_real(rng, -0.05, 0.05);
  return p;
}

Vec embed_text(const std::string& text, const EncoderParams& params,
               const EncoderConfig& config) {
  return encode(text, params, config).output;
}

}  // namespace ember
