#pragma once

#include <stdexcept>
#include <string>

namespace monsoon {

enum class ErrorCode {
  // ingest
  MalformedRow,
  DuplicateDate,
  NegativeRainfall,
  NonJjasDate,
  IncompleteYear,
  MalformedHeader,
  YearOutOfDeclaredRange,
  WrongFieldCount,
  DuplicateKey,
  NetworkUnavailable,
  HttpStatus,
  IoError,
  // features
  MissingMonth,
  CoverageGap,
  DegenerateChannel,
  UnknownChannel,
  WindowTooLong,
  EmptyTable,
  // numerical core / models
  ShapeMismatch,
  NonFiniteValue,
  NonFiniteGradient,
  WindowShorterThanPatch,
  MissingExogenous,
  SingularSystem,
  // training
  EmptyData,
  NonFiniteLoss,
  AllTrialsFailed,
  VersionMismatch,
  CorruptCheckpoint,
  // evaluation
  LengthMismatch,
  ZeroObservation,
  DegenerateN,
  TooFewYears,
  DegenerateTerciles,
};

const char* error_code_name(ErrorCode code);

// All failures surface as this exception. `code()` identifies the contract
// that was violated; the context fields are filled where they make sense
// (parser line numbers, calendar keys, HTTP status).
class MonsoonError : public std::runtime_error {
 public:
  MonsoonError(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

  long line = -1;
  int year = 0;
  int month = 0;
  int http_status = 0;

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);
[[noreturn]] void raise_at_line(ErrorCode code, const std::string& message, long line);

}  // namespace monsoon
