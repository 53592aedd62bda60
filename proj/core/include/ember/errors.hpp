#pragma once

#include <stdexcept>
#include <string>

namespace ember {

enum class ErrorCode {
  // numerics
  zero_norm,
  length_mismatch,
  empty_input,
  non_finite,
  // encoder
  empty_text,
  shape_mismatch,
  // losses
  empty_batch,
  empty_negatives,
  task_batch_mismatch,
  // mrl
  dim_out_of_range,
  // data
  parse_error,
  schema_error,
  empty_dataset,
  unknown_label,
  degenerate_label_set,
  batch_too_small,
  // mining
  empty_corpus,
  window_empty,
  // synth
  auth_error,
  rate_limited,
  timeout,
  service_error,
  not_json,
  missing_key,
  too_short,
  // checkpoints
  bad_magic,
  version_mismatch,
  truncated_file,
  header_shape_mismatch,
  // eval
  missing_split,
  degenerate_clusters,
  single_class,
  no_relevant_docs,
  constant_input,
  // io / config
  io_error,
  config_error,
};

const char* error_code_name(ErrorCode code);

/// Every failure in the library surfaces as an Error carrying a machine
/// readable code plus a human readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ember
