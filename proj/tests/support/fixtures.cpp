#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace crosscut::testing {

namespace fs = std::filesystem;

std::vector<lang::ModuleSource> fixture_sources(const std::string& name) {
  const fs::path dir = fs::path(CROSSCUT_FIXTURES) / name;
  std::vector<lang::ModuleSource> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().extension() != ".cc") continue;
    std::ifstream in(entry.path());
    std::stringstream text;
    text << in.rdbuf();
    out.push_back({fs::relative(entry.path(), dir).generic_string(), text.str()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

trace::Trace Loaded::run(std::size_t i) const { return run(trace::full_scope(*program), i); }

trace::Trace Loaded::run(const trace::TraceScope& scope, std::size_t i) const {
  trace::TraceOptions options;
  options.record_base_duration = false;
  return trace::trace_run(*program, example(i), scope, options);
}

nlohmann::json untraced_outcome(const lang::SourceProgram& program, const annotations::Example& example) {
  lang::Interpreter interpreter(program);
  auto env = interpreter.new_scope(*program.find_module(example.module_path));
  try {
    if (example.setup) interpreter.run_block(*example.setup, env);
    const lang::Value result = interpreter.run_block(*example.body, env);
    return {{"value", trace::to_json(trace::snapshot(result))}};
  } catch (const lang::RuntimeError& e) {
    nlohmann::json out{{"error", std::string(lang::runtime_error_kind_name(e.kind()))}};
    if (e.kind() == lang::RuntimeErrorKind::UncaughtThrow) out["thrown"] = trace::to_json(trace::snapshot(e.thrown()));
    return out;
  }
}

nlohmann::json traced_outcome(const trace::Trace& trace) {
  if (trace.status == trace::TraceStatus::Completed) {
    const auto result = trace::root_result(trace);
    return {{"value", result ? trace::to_json(*result) : nlohmann::json()}};
  }
  nlohmann::json out{{"error", trace.failure ? trace.failure->kind : std::string("overflowed")}};
  if (trace.failure && trace.failure->thrown) out["thrown"] = trace::to_json(*trace.failure->thrown);
  return out;
}

std::string bracketing_violation(const trace::Trace& trace) {
  std::vector<trace::FrameId> open;
  std::set<trace::FrameId> seen;
  trace::FrameId last = -1;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    if (e.seq != static_cast<trace::Seq>(i + 1)) return "seq gap at " + std::to_string(i);
    if (const auto* enter = e.enter()) {
      if (enter->frame <= last || !seen.insert(enter->frame).second) return "frame ids not increasing";
      if ((open.empty() ? trace::kNoFrame : open.back()) != enter->parent) return "wrong parent";
      last = enter->frame;
      open.push_back(enter->frame);
    } else if (const auto* exit = e.exit()) {
      if (open.empty() || open.back() != exit->frame) return "exit does not match innermost frame";
      open.pop_back();
    } else {
      const auto* hit = e.probe();
      if (open.empty() || open.back() != hit->frame) return "probe outside its frame";
    }
  }
  if (!open.empty()) return "frames left open";
  if (trace.status == trace::TraceStatus::Failed && trace.failure && trace.failure->phase == "body") {
    // the failing frames form the tail of the stream: every exit after the
    // last non-exception event is an exception exit, down to the root
    const auto* root_exit = trace.events.back().exit();
    if (!root_exit || root_exit->frame != trace::kRootFrame || root_exit->kind != trace::ExitKind::Exception) {
      return "root not closed with an exception exit";
    }
  }
  return {};
}

Loaded load(std::vector<lang::ModuleSource> sources) {
  Loaded out;
  out.program = lang::SourceProgram::parse(std::move(sources));
  out.annotations = annotations::extract_annotations(*out.program);
  return out;
}

Loaded load_fixture(const std::string& name) { return load(fixture_sources(name)); }

Loaded load_text(const std::string& text) { return load({{"m.cc", text}}); }

} // namespace crosscut::testing
