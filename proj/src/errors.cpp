#include "monsoon/errors.hpp"

namespace monsoon {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::NegativeRainfall: return "NegativeRainfall";
    case ErrorCode::NonJjasDate: return "NonJjasDate";
    case ErrorCode::IncompleteYear: return "IncompleteYear";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::YearOutOfDeclaredRange: return "YearOutOfDeclaredRange";
    case ErrorCode::WrongFieldCount: return "WrongFieldCount";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::NetworkUnavailable: return "NetworkUnavailable";
    case ErrorCode::HttpStatus: return "HttpStatus";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingMonth: return "MissingMonth";
    case ErrorCode::CoverageGap: return "CoverageGap";
    case ErrorCode::DegenerateChannel: return "DegenerateChannel";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::WindowTooLong: return "WindowTooLong";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::WindowShorterThanPatch: return "WindowShorterThanPatch";
    case ErrorCode::MissingExogenous: return "MissingExogenous";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::AllTrialsFailed: return "AllTrialsFailed";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroObservation: return "ZeroObservation";
    case ErrorCode::DegenerateN: return "DegenerateN";
    case ErrorCode::TooFewYears: return "TooFewYears";
    case ErrorCode::DegenerateTerciles: return "DegenerateTerciles";
  }
  return "Unknown";
}

MonsoonError::MonsoonError(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw MonsoonError(code, message); }

void raise_at_line(ErrorCode code, const std::string& message, long line) {
  MonsoonError e(code, message + " (line " + std::to_string(line) + ")");
  e.line = line;
  throw e;
}

}  // namespace monsoon
