#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace touchbench {

enum class ErrorCode {
  EmptyTrace,
  NonMonotonicTime,
  ParseError,
  SchemaViolation,
  IoError,
  TooFewActions,
  NotASwipe,
  SingleClass,
  TooFewRows,
  UnknownFeature,
  EmptyClass,
  MissingChannelData,
  NonFinite,
  DimensionMismatch,
  DegenerateChord,
  EmptyDB,
  InvalidConfig,
  InvalidProfile,
  NoHumanSwipes,
  TooFewSamples,
  EmptyInput,
  MissingSplit,
  EmptySession,
  UnknownSessionId,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI, the Python layer) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line_no, const std::string& reason)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string field, const std::string& detail, std::size_t line_no = 0)
      : Error(ErrorCode::SchemaViolation,
              (line_no ? "line " + std::to_string(line_no) + ": " : std::string()) + "field '" +
                  field + "': " + detail),
        field_(std::move(field)),
        line_no_(line_no) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::string field_;
  std::size_t line_no_;
};

}  // namespace touchbench
