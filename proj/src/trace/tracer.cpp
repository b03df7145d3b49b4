#include "crosscut/trace/tracer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>

namespace crosscut::trace {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

class Tracer final : public lang::ExecutionObserver {
public:
  Tracer(const lang::SourceProgram& program, const TraceScope& scope, const std::string& example_module,
         Trace& trace, const TraceOptions& options)
      : trace_(trace), cap_(std::max<std::size_t>(options.event_cap, 2)), limits_(options.snapshot_limits) {
    in_scope_.resize(program.modules().size());
    for (const auto& module : program.modules()) {
      in_scope_[static_cast<std::size_t>(module.index)] =
          scope.includes(module.path) || module.path == example_module;
    }
    probe_ids_.resize(static_cast<std::size_t>(program.node_count()));
    for (const auto& module : program.modules()) {
      lang::walk(*module.root, [&](const lang::AstNode& n) {
        if (n.kind == lang::NodeKind::ProbeWrapper) {
          probe_ids_[static_cast<std::size_t>(n.id)] =
              std::make_shared<const std::string>(annotations::probe_id(n.span));
        }
        return true;
      });
    }
  }

  void enter_root(const lang::MethodId& root, lang::NodeId site) {
    push_enter(std::make_shared<const lang::MethodId>(root), site, {});
  }

  void exit_root(ExitKind kind, Snapshot result) {
    if (!open_.empty()) {
      push_exit(kind, std::move(result));
    }
  }

  // Closes every frame left open after an abort.
  void close_all() {
    while (!open_.empty()) {
      push_exit(ExitKind::Exception, Snapshot());
    }
  }

  bool overflowed() const { return overflowed_; }

  void on_call_enter(const lang::Function& callee, const lang::AstNode& call_site,
                     std::span<const lang::Value> args) override {
    if (suppressed_ > 0) {
      ++suppressed_;
      return;
    }
    if (callee.module_index < 0 || !in_scope_[static_cast<std::size_t>(callee.module_index)]) {
      suppressed_ = 1;
      return;
    }
    // Room for this enter plus the exits of every open frame and this one.
    if (trace_.events.size() + open_.size() + 2 > cap_) {
      overflow();
    }
    std::vector<Snapshot> snaps;
    snaps.reserve(args.size());
    for (const auto& arg : args) {
      snaps.push_back(snapshot(arg, limits_));
    }
    push_enter(callee.method, call_site.id, std::move(snaps));
  }

  void on_call_exit(const lang::Value& result) override { leave(ExitKind::Normal, result); }

  void on_call_unwind(const lang::Value& payload) override { leave(ExitKind::Exception, payload); }

  void on_probe(const lang::AstNode& probe, const lang::Value& value) override {
    if (overflowed_) {
      return;
    }
    if (trace_.events.size() + open_.size() + 1 > cap_) {
      overflow();
    }
    TraceEvent event;
    event.seq = next_seq();
    event.data = ProbeHit{probe_ids_[static_cast<std::size_t>(probe.id)], open_.back(), snapshot(value, limits_)};
    trace_.events.push_back(std::move(event));
  }

private:
  [[noreturn]] void overflow() {
    overflowed_ = true;
    throw lang::ExecutionAborted();
  }

  void leave(ExitKind kind, const lang::Value& result) {
    if (overflowed_) {
      return;
    }
    if (suppressed_ > 0) {
      --suppressed_;
      return;
    }
    push_exit(kind, snapshot(result, limits_));
  }

  Seq next_seq() const { return static_cast<Seq>(trace_.events.size()) + 1; }

  void push_enter(lang::MethodRef method, lang::NodeId site, std::vector<Snapshot> args) {
    const FrameId frame = next_frame_++;
    TraceEvent event;
    event.seq = next_seq();
    event.data = CallEnter{frame, std::move(method), open_.empty() ? kNoFrame : open_.back(), site, std::move(args)};
    trace_.events.push_back(std::move(event));
    open_.push_back(frame);
  }

  void push_exit(ExitKind kind, Snapshot result) {
    TraceEvent event;
    event.seq = next_seq();
    event.data = CallExit{open_.back(), kind, std::move(result)};
    trace_.events.push_back(std::move(event));
    open_.pop_back();
  }

  Trace& trace_;
  std::size_t cap_;
  SnapshotLimits limits_;
  std::vector<bool> in_scope_;
  std::vector<std::shared_ptr<const std::string>> probe_ids_;
  std::vector<FrameId> open_;
  FrameId next_frame_ = kRootFrame;
  int suppressed_ = 0;
  bool overflowed_ = false;
};

TraceFailure failure_from(const lang::RuntimeError& error, const char* phase, const SnapshotLimits& limits) {
  TraceFailure failure;
  failure.phase = phase;
  failure.kind = std::string(lang::runtime_error_kind_name(error.kind()));
  failure.message = error.what();
  failure.span = error.span();
  if (error.kind() == lang::RuntimeErrorKind::UncaughtThrow) {
    failure.thrown = snapshot(error.thrown(), limits);
  }
  return failure;
}

Snapshot error_snapshot(const lang::RuntimeError& error, const SnapshotLimits& limits) {
  if (error.kind() == lang::RuntimeErrorKind::UncaughtThrow) {
    return snapshot(error.thrown(), limits);
  }
  auto record = std::make_shared<SnapshotRecord>();
  record->fields.emplace_back("error", Snapshot(Snapshot::Data(std::string(lang::runtime_error_kind_name(error.kind())))));
  record->fields.emplace_back("message", Snapshot(Snapshot::Data(std::string(error.what()))));
  return Snapshot(std::shared_ptr<const SnapshotRecord>(std::move(record)));
}

const lang::Module& module_of_example(const lang::SourceProgram& program, const annotations::Example& example) {
  const lang::Module* module = program.find_module(example.module_path);
  if (module == nullptr || example.body == nullptr) {
    throw Error(ErrorCode::UnknownExample, "example '" + example.example_id + "' is not part of the program");
  }
  return *module;
}

} // namespace

TraceScope full_scope(const lang::SourceProgram& program) {
  TraceScope scope;
  for (const auto& module : program.modules()) {
    scope.included_modules.insert(module.path);
  }
  return scope;
}

std::string next_run_id() {
  static std::atomic<std::uint64_t> counter{0};
  return "run-" + std::to_string(++counter);
}

Trace trace_run(const lang::SourceProgram& program, const annotations::Example& example, const TraceScope& scope,
                const TraceOptions& options) {
  const lang::Module& module = module_of_example(program, example);

  Trace trace;
  trace.run_id = next_run_id();
  trace.example_id = example.example_id;
  trace.scope = scope;
  trace.scope.included_modules.insert(example.module_path);

  if (options.record_base_duration) {
    lang::Interpreter base(program, options.interpreter);
    auto env = base.new_scope(module);
    try {
      if (example.setup != nullptr) {
        base.run_block(*example.setup, env);
      }
      const auto start = Clock::now();
      base.run_block(*example.body, env);
      trace.base_duration_ms = elapsed_ms(start);
    } catch (const lang::RuntimeError&) {
      // the traced run below reports the failure
    }
  }

  lang::Interpreter interpreter(program, options.interpreter);
  auto env = interpreter.new_scope(module);

  if (example.setup != nullptr) {
    try {
      interpreter.run_block(*example.setup, env);
    } catch (const lang::RuntimeError& error) {
      trace.status = TraceStatus::Failed;
      trace.failure = failure_from(error, "setup", options.snapshot_limits);
      trace.output = interpreter.output();
      return trace;
    }
  }

  Tracer tracer(program, trace.scope, example.module_path, trace, options);
  const auto start = Clock::now();
  tracer.enter_root(example.root_method(), example.decl != nullptr ? example.decl->id : example.body->id);
  bool body_ok = false;
  interpreter.set_observer(&tracer);
  try {
    lang::Value result = interpreter.run_block(*example.body, env);
    tracer.exit_root(ExitKind::Normal, snapshot(result, options.snapshot_limits));
    body_ok = true;
  } catch (const lang::RuntimeError& error) {
    trace.status = TraceStatus::Failed;
    trace.failure = failure_from(error, "body", options.snapshot_limits);
    tracer.exit_root(ExitKind::Exception, error_snapshot(error, options.snapshot_limits));
  } catch (const lang::ExecutionAborted&) {
    trace.status = TraceStatus::Overflowed;
    tracer.close_all();
  }
  interpreter.set_observer(nullptr);
  trace.traced_duration_ms = elapsed_ms(start);

  if (body_ok && example.teardown != nullptr) {
    try {
      interpreter.run_block(*example.teardown, env);
    } catch (const lang::RuntimeError& error) {
      trace.status = TraceStatus::Failed;
      trace.failure = failure_from(error, "teardown", options.snapshot_limits);
    }
  }
  trace.output = interpreter.output();
  return trace;
}

std::optional<Snapshot> root_result(const Trace& trace) {
  if (trace.events.empty()) {
    return std::nullopt;
  }
  const auto* exit = trace.events.back().exit();
  if (exit == nullptr || exit->frame != kRootFrame || exit->kind != ExitKind::Normal) {
    return std::nullopt;
  }
  return exit->result;
}

OverheadReport measure_overhead(const lang::SourceProgram& program, const annotations::Example& example,
                                const TraceScope& scope, int repetitions, const TraceOptions& options) {
  const lang::Module& module = module_of_example(program, example);
  repetitions = std::max(repetitions, 5);

  auto median = [](std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const std::size_t mid = samples.size() / 2;
    return samples.size() % 2 == 1 ? samples[mid] : (samples[mid - 1] + samples[mid]) / 2.0;
  };

  std::vector<double> base;
  for (int i = 0; i < repetitions; ++i) {
    lang::Interpreter interpreter(program, options.interpreter);
    auto env = interpreter.new_scope(module);
    if (example.setup != nullptr) {
      interpreter.run_block(*example.setup, env);
    }
    const auto start = Clock::now();
    interpreter.run_block(*example.body, env);
    base.push_back(elapsed_ms(start));
  }

  std::vector<double> traced;
  for (int i = 0; i < repetitions; ++i) {
    traced.push_back(trace_run(program, example, scope, options).traced_duration_ms);
  }

  OverheadReport report;
  report.base_ms = median(std::move(base));
  report.traced_ms = median(std::move(traced));
  if (report.base_ms < 0.1) {
    throw Error(ErrorCode::Unmeasurable, "untraced run takes " + std::to_string(report.base_ms) +
                                             " ms, below the 0.1 ms timing floor");
  }
  report.factor = report.traced_ms / report.base_ms;
  return report;
}

} // namespace crosscut::trace
