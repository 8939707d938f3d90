#include "touchbench/error.hpp"

namespace touchbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TooFewActions: return "TooFewActions";
    case ErrorCode::NotASwipe: return "NotASwipe";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::MissingChannelData: return "MissingChannelData";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateChord: return "DegenerateChord";
    case ErrorCode::EmptyDB: return "EmptyDB";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::NoHumanSwipes: return "NoHumanSwipes";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingSplit: return "MissingSplit";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::UnknownSessionId: return "UnknownSessionId";
  }
  return "Unknown";
}

}  // namespace touchbench
