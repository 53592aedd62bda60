#include "ember/errors.hpp"

namespace ember {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::zero_norm: return "ZeroNorm";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::empty_text: return "EmptyText";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::empty_batch: return "EmptyBatch";
    case ErrorCode::empty_negatives: return "EmptyNegatives";
    case ErrorCode::task_batch_mismatch: return "TaskBatchMismatch";
    case ErrorCode::dim_out_of_range: return "DimOutOfRange";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::unknown_label: return "UnknownLabel";
    case ErrorCode::degenerate_label_set: return "DegenerateLabelSet";
    case ErrorCode::batch_too_small: return "BatchTooSmall";
    case ErrorCode::empty_corpus: return "EmptyCorpus";
    case ErrorCode::window_empty: return "WindowEmpty";
    case ErrorCode::auth_error: return "AuthError";
    case ErrorCode::rate_limited: return "RateLimited";
    case ErrorCode::timeout: return "Timeout";
    case ErrorCode::service_error: return "ServiceError";
    case ErrorCode::not_json: return "NotJson";
    case ErrorCode::missing_key: return "MissingKey";
    case ErrorCode::too_short: return "TooShort";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::version_mismatch: return "VersionMismatch";
    case ErrorCode::truncated_file: return "TruncatedFile";
    case ErrorCode::header_shape_mismatch: return "HeaderShapeMismatch";
    case ErrorCode::missing_split: return "MissingSplit";
    case ErrorCode::degenerate_clusters: return "DegenerateClusters";
    case ErrorCode::single_class: return "SingleClass";
    case ErrorCode::no_relevant_docs: return "NoRelevantDocs";
    case ErrorCode::constant_input: return "ConstantInput";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace ember
