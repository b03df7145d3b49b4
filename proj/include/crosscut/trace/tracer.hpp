#pragma once

#include "crosscut/annotations/annotations.hpp"
#include "crosscut/lang/interpreter.hpp"
#include "crosscut/trace/trace.hpp"

#include <cstddef>
#include <optional>

namespace crosscut::trace {

struct TraceOptions {
  std::size_t event_cap = 1'000'000;
  lang::InterpreterOptions interpreter;
  SnapshotLimits snapshot_limits;
  // Run the body once untraced first and record base_duration_ms.
  bool record_base_duration = false;
};

// Scope covering every module of the program.
TraceScope full_scope(const lang::SourceProgram& program);

// Process-unique run identifier.
std::string next_run_id();

// Runs setup (untraced), the example body (traced), then teardown (untraced,
// only after a successful body). Never throws for program errors: failures
// are reported through status and failure, and events stay well-bracketed.
Trace trace_run(const lang::SourceProgram& program, const annotations::Example& example, const TraceScope& scope,
                const TraceOptions& options = {});

// Result snapshot of the root frame, or nullopt if the body did not complete.
std::optional<Snapshot> root_result(const Trace& trace);

struct OverheadReport {
  double base_ms = 0.0;
  double traced_ms = 0.0;
  double factor = 0.0;
};

// Median wall time of `repetitions` untraced and traced body executions.
// Throws Error(Unmeasurable) when the untraced median is below 0.1 ms, and
// Error(RuntimeError) if the example fails untraced.
OverheadReport measure_overhead(const lang::SourceProgram& program, const annotations::Example& example,
                                const TraceScope& scope, int repetitions = 5, const TraceOptions& options = {});

} // namespace crosscut::trace
