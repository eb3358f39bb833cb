#include "kerbside/error.hpp"

namespace kerbside {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::DuplicateFrameId: return "DuplicateFrameId";
    case ErrorCode::OverlappingRegions: return "OverlappingRegions";
    case ErrorCode::InvalidRegion: return "InvalidRegion";
    case ErrorCode::UnlabeledFrames: return "UnlabeledFrames";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::NotPortrait: return "NotPortrait";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::WrongSize: return "WrongSize";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::MixedDescriptors: return "MixedDescriptors";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::UnknownFrameId: return "UnknownFrameId";
    case ErrorCode::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorCode::UnknownRegion: return "UnknownRegion";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::OverlapViolation: return "OverlapViolation";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::NoSegmentableFrames: return "NoSegmentableFrames";
    case ErrorCode::OnlyTransitions: return "OnlyTransitions";
    case ErrorCode::MissingPredictions: return "MissingPredictions";
    case ErrorCode::RangeGap: return "RangeGap";
    case ErrorCode::RangeOverlap: return "RangeOverlap";
    case ErrorCode::UnknownBatch: return "UnknownBatch";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& reason)
    : Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + ": " + reason),
      line_(line),
      column_(column),
      reason_(reason) {}

}  // namespace kerbside
