#pragma once

#include <stdexcept>
#include <string>

namespace kerbside {

// Numeric values are part of the C ABI (kb_status in kerbside.h); append only.
enum class ErrorCode : int {
  Ok = 0,
  Io = 1,
  Parse = 2,
  UnknownClass = 3,
  DuplicateFrameId = 4,
  OverlappingRegions = 5,
  InvalidRegion = 6,
  UnlabeledFrames = 7,
  EmptySequence = 8,
  NotPortrait = 9,
  InvalidTarget = 10,
  WrongSize = 11,
  EmptyTrainingSet = 12,
  MixedDescriptors = 13,
  MissingImage = 14,
  UnknownFrameId = 15,
  DuplicatePrediction = 16,
  UnknownRegion = 17,
  EmptyRegion = 18,
  OverlapViolation = 19,
  LengthMismatch = 20,
  EmptyInput = 21,
  EmptyMatrix = 22,
  NoSegmentableFrames = 23,
  OnlyTransitions = 24,
  MissingPredictions = 25,
  RangeGap = 26,
  RangeOverlap = 27,
  UnknownBatch = 28,
  Config = 29,
  InvalidArgument = 30,
  Internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised for malformed CSV/JSON input. Line and column are 1-based; 0 means
// "not applicable".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

}  // namespace kerbside
