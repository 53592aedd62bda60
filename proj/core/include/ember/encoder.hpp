#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ember/numerics.hpp"

namespace ember {

/// A tiny trainable text encoder: hashed character n-gram embedding table,
/// mean pooling, then a learnable linear scaling head that maps the pooled
/// hidden vector (hidden_dim) up to the output embedding (out_dim).
struct EncoderConfig {
  std::size_t vocab_size = 4096;  // hash buckets
  std::size_t hidden_dim = 64;
  std::size_t out_dim = 128;
  std::size_t ngram = 2;  // 1, 2 or 3
  std::uint64_t hash_seed = 0x5eedULL;
};

struct EncoderParams {
  Mat embed_table;  // vocab_size x hidden_dim
  Mat proj_weight;  // hidden_dim x out_dim
  Vec proj_bias;    // out_dim
};

/// Forward-pass cache consumed by encode_backward.
struct EncodeTrace {
  std::vector<std::size_t> token_ids;
  Vec pooled;  // hidden_dim
  Vec output;  // out_dim
};

/// Parameter gradients, same shapes as EncoderParams.
struct EncoderGrads {
  Mat embed_table;
  Mat proj_weight;
  Vec proj_bias;
};

void validate_config(const EncoderConfig& config);

/// Hash buckets for the character n-grams of `text` (n-grams run over UTF-8
/// code point boundaries; text shorter than one n-gram hashes whole).
/// Token list is truncated to 512 entries. Throws EmptyText when the text is
/// empty after trimming ASCII whitespace.
std::vector<std::size_t> tokenize(const std::string& text,
                                  const EncoderConfig& config);

/// Seeded FNV-1a over a byte range; exposed so tests can pin the bucket
/// assignment against an independent reimplementation.
std::uint64_t ngram_hash(const char* data, std::size_t len, std::uint64_t seed);

/// pooled = mean of embed_table rows at token ids;
/// output = pooled^T * proj_weight + proj_bias. No normalization here.
EncodeTrace encode(const std::string& text, const EncoderParams& params,
                   const EncoderConfig& config);

EncoderGrads zero_grads(const EncoderConfig& config);

/// Accumulates d(output)/d(params) * grad_output into `acc`.
void encode_backward_into(const EncodeTrace& trace, const Vec& grad_output,
                          const EncoderParams& params, EncoderGrads& acc);

/// Exact parameter gradients of output w.r.t. params under the chain rule.
EncoderGrads encode_backward(const EncodeTrace& trace, const Vec& grad_output,
                             const EncoderParams& params);

/// Seeded uniform(-0.05, 0.05) initialization.
EncoderParams random_params(const EncoderConfig& config, std::uint64_t seed);

/// Convenience: encode and return just the output embedding.
Vec embed_text(const std::string& text, const EncoderParams& params,
               const EncoderConfig& config);

}  // namespace ember
