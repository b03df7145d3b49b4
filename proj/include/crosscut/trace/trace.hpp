#pragma once

#include "crosscut/lang/ast.hpp"
#include "crosscut/lang/source.hpp"
#include "crosscut/trace/snapshot.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace crosscut::trace {

using FrameId = std::int64_t;
using Seq = std::int64_t;

inline constexpr FrameId kRootFrame = 0;
inline constexpr FrameId kNoFrame = -1;

enum class ExitKind { Normal, Exception };

std::string_view exit_kind_name(ExitKind kind);

struct CallEnter {
  FrameId frame = 0;
  lang::MethodRef method;
  FrameId parent = kNoFrame; // kNoFrame only for the root
  lang::NodeId site = -1;    // call-site node; example-decl node for the root
  std::vector<Snapshot> args;
};

struct CallExit {
  FrameId frame = 0;
  ExitKind kind = ExitKind::Normal;
  Snapshot result;
};

struct ProbeHit {
  std::shared_ptr<const std::string> probe_id;
  FrameId frame = 0;
  Snapshot value;
};

struct TraceEvent {
  Seq seq = 0;
  std::variant<CallEnter, CallExit, ProbeHit> data;

  const CallEnter* enter() const { return std::get_if<CallEnter>(&data); }
  const CallExit* exit() const { return std::get_if<CallExit>(&data); }
  const ProbeHit* probe() const { return std::get_if<ProbeHit>(&data); }
};

// Modules whose invocations are recorded. The example's own module is
// always traced regardless of this set.
struct TraceScope {
  std::set<std::string> included_modules;
  bool always_trace_examples = true;

  bool includes(const std::string& module_path) const { return included_modules.contains(module_path); }
};

enum class TraceStatus { Completed, Failed, Overflowed };

std::string_view trace_status_name(TraceStatus status);
std::optional<TraceStatus> parse_trace_status(std::string_view name);

struct TraceFailure {
  std::string phase; // "setup" | "body" | "teardown"
  std::string kind;  // runtime error kind name
  std::string message;
  lang::SourceSpan span;
  std::optional<Snapshot> thrown;
};

struct Trace {
  std::string run_id;
  std::string example_id;
  TraceScope scope;
  std::vector<TraceEvent> events;
  TraceStatus status = TraceStatus::Completed;
  std::optional<TraceFailure> failure;
  std::optional<double> base_duration_ms;
  double traced_duration_ms = 0.0;
  std::vector<std::string> output;
};

// Throws Error(MalformedTrace) unless: seqs are 1..n; every exit matches the
// innermost open frame; frame ids increase in enter order; the first event
// enters the root; probes refer to open frames; nothing is left open.
void validate_bracketing(const Trace& trace);

} // namespace crosscut::trace
