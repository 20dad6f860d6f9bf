#pragma once

#include <stdexcept>
#include <string>

namespace melkit {

enum class ErrorCode {
  // kb_core
  malformed_line,
  duplicate_id,
  missing_field,
  bad_ratios,
  bad_splits,
  // fuzzy / retrieval
  unknown_entity_id,
  dim_mismatch,
  zero_vector,
  missing_summary,
  missing_description,
  bad_index_file,
  // gateway
  precondition,
  timeout,
  http_status,
  malformed_response,
  retries_exhausted,
  unsupported_media_type,
  // augmentation
  empty_augmentation,
  image_unreadable,
  // selection
  empty_candidates,
  empty_reply,
  // eval
  empty_split,
  misaligned_ids,
  // cli / io
  bad_config,
  io_error,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::duplicate_id: return "DuplicateId";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::bad_ratios: return "BadRatios";
    case ErrorCode::bad_splits: return "BadSplits";
    case ErrorCode::unknown_entity_id: return "UnknownEntityId";
    case ErrorCode::dim_mismatch: return "DimMismatch";
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::missing_summary: return "MissingSummary";
    case ErrorCode::missing_description: return "MissingDescription";
    case ErrorCode::bad_index_file: return "BadIndexFile";
    case ErrorCode::precondition: return "Precondition";
    case ErrorCode::timeout: return "Timeout";
    case ErrorCode::http_status: return "HttpStatus";
    case ErrorCode::malformed_response: return "MalformedResponse";
    case ErrorCode::retries_exhausted: return "RetriesExhausted";
    case ErrorCode::unsupported_media_type: return "UnsupportedMediaType";
    case ErrorCode::empty_augmentation: return "EmptyAugmentation";
    case ErrorCode::image_unreadable: return "ImageUnreadable";
    case ErrorCode::empty_candidates: return "EmptyCandidates";
    case ErrorCode::empty_reply: return "EmptyReply";
    case ErrorCode::empty_split: return "EmptySplit";
    case ErrorCode::misaligned_ids: return "MisalignedIds";
    case ErrorCode::bad_config: return "BadConfig";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

// Single exception type for the whole library. `code` carries the error
// taxonomy; `context` holds the offending id/field/path when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string context = {},
        long line = -1)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(std::move(message)),
        context_(std::move(context)),
        line_(line) {}

  // The message without the code-name prefix that what() carries.
  const std::string& message() const { return message_; }

  ErrorCode code() const noexcept { return code_; }
  const std::string& context() const noexcept { return context_; }
  long line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string context_;
  long line_;
};

}  // namespace melkit
