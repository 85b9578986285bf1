#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hscan {

enum class ErrorCode {
  Empty,
  CycleDetected,
  ForwardParent,
  OutOfRange,
  IndexOutOfRange,
  InvalidBlockSize,
  NonUnitQuaternion,
  TrackCountMismatch,
  WeightSumZero,
  LengthMismatch,
  WrongSpaceTag,
  WriteConflict,
  IoError,
  InvalidSpec,
  ToleranceExceeded,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::ForwardParent: return "ForwardParent";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidBlockSize: return "InvalidBlockSize";
    case ErrorCode::NonUnitQuaternion: return "NonUnitQuaternion";
    case ErrorCode::TrackCountMismatch: return "TrackCountMismatch";
    case ErrorCode::WeightSumZero: return "WeightSumZero";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::WrongSpaceTag: return "WrongSpaceTag";
    case ErrorCode::WriteConflict: return "WriteConflict";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ToleranceExceeded: return "ToleranceExceeded";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hscan
