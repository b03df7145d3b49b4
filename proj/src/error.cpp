#include "crosscut/error.hpp"

namespace crosscut {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
  case ErrorCode::ParseError: return "parse-error";
  case ErrorCode::AnnotationError: return "annotation-error";
  case ErrorCode::RuntimeError: return "runtime-error";
  case ErrorCode::UnknownExample: return "unknown-example";
  case ErrorCode::ExampleInactive: return "example-inactive";
  case ErrorCode::UnknownRun: return "unknown-run";
  case ErrorCode::UnknownNode: return "unknown-node";
  case ErrorCode::UnknownTarget: return "unknown-target";
  case ErrorCode::OrdinalOutOfRange: return "ordinal-out-of-range";
  case ErrorCode::MalformedTrace: return "malformed-trace";
  case ErrorCode::NoSources: return "no-sources";
  case ErrorCode::InvalidScope: return "invalid-scope";
  case ErrorCode::Unmeasurable: return "unmeasurable";
  case ErrorCode::Io: return "io-error";
  case ErrorCode::BadRequest: return "bad-request";
  case ErrorCode::PortInUse: return "port-in-use";
  }
  return "internal-error";
}

} // namespace crosscut
