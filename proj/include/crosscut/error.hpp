#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crosscut {

// Every failure that crosses a module boundary carries exactly one code.
enum class ErrorCode {
  ParseError,
  AnnotationError,
  RuntimeError,
  UnknownExample,
  ExampleInactive,
  UnknownRun,
  UnknownNode,
  UnknownTarget,
  OrdinalOutOfRange,
  MalformedTrace,
  NoSources,
  InvalidScope,
  Unmeasurable,
  Io,
  BadRequest,
  PortInUse,
};

// Machine-readable, kebab-case name ("unknown-example", ...).
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

private:
  ErrorCode code_;
};

} // namespace crosscut
