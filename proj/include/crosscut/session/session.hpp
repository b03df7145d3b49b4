#pragma once

#include "crosscut/analysis/call_tree.hpp"
#include "crosscut/analysis/queries.hpp"
#include "crosscut/annotations/annotations.hpp"
#include "crosscut/lang/program.hpp"
#include "crosscut/session/config.hpp"
#include "crosscut/trace/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace crosscut::session {

// One recorded run with everything needed to answer queries about it. The
// program is kept alive so node ids in the trace stay resolvable.
struct Run {
  std::string run_id;
  std::string example_id;
  std::uint64_t generation = 0;
  bool imported = false;
  std::shared_ptr<const lang::SourceProgram> program; // null for imported traces
  std::shared_ptr<const trace::Trace> trace;
  std::shared_ptr<const analysis::CallTree> tree;
  std::shared_ptr<const analysis::ProbeCatalog> probes;
};

struct BrokenModule {
  std::string path;
  std::string message;
  lang::SourceSpan span;
};

// Immutable snapshot of the whole session. Readers hold a shared_ptr to one
// of these; writers publish a fresh copy.
struct SessionState {
  std::uint64_t generation = 0;
  std::filesystem::path root;
  std::vector<lang::ModuleSource> sources;            // every module on disk, broken ones included
  std::shared_ptr<const lang::SourceProgram> program; // last program that parsed
  std::uint64_t program_generation = 0;               // generation `program` was built at
  annotations::Annotations annotations;
  trace::TraceScope scope;
  std::size_t event_cap = 1'000'000;
  std::vector<BrokenModule> broken;
  std::map<std::string, std::shared_ptr<const Run>> latest; // example_id -> run
  std::map<std::string, std::shared_ptr<const Run>> runs;   // run_id -> run (latest and imported)

  // A run is stale when sources changed after it was recorded without a
  // successful reload.
  bool is_stale(const Run& run) const { return !run.imported && run.generation != generation; }
  const Run* find_run(const std::string& run_id) const;
  const annotations::Example* find_example(const std::string& example_id) const;
};

class Session {
public:
  // Scans <root>/**/*.cc. Throws Error(NoSources) when there are none and
  // Error(Io) when the directory cannot be read. Files that fail to parse are
  // recorded as broken; the rest are loaded.
  static std::shared_ptr<Session> open(const std::filesystem::path& root);
  // Analysis-only session holding a single imported trace.
  static std::shared_ptr<Session> for_trace(trace::Trace trace);

  std::shared_ptr<const SessionState> state() const;

  // Throws Error(UnknownExample) or Error(ExampleInactive).
  std::string run_example(const std::string& example_id);
  // Runs every active example; returns the new run ids.
  std::vector<std::string> run_all();
  // Reloads every source. On a parse error nothing is re-run and existing
  // runs become stale; otherwise all active examples are re-run.
  std::vector<std::string> notify_change(const std::string& changed_path = {});
  // Throws Error(InvalidScope) for unknown modules or when an example's own
  // module would be excluded. Re-runs all active examples.
  std::vector<std::string> set_scope(const std::set<std::string>& modules);
  // Activating runs the example; deactivating drops its run.
  std::optional<std::string> set_active(const std::string& example_id, bool active);
  std::string add_trace(trace::Trace trace);

  using Listener = std::function<void(const std::vector<std::string>& run_ids)>;
  // Called after every publication caused by run/reload/scope/activation.
  int subscribe(Listener listener);
  void unsubscribe(int id);

private:
  Session() = default;

  std::shared_ptr<Run> execute(const SessionState& state, const annotations::Example& example) const;
  std::vector<std::string> rerun_active(SessionState& next) const;
  void reload(SessionState& next, bool initial);
  void publish(std::shared_ptr<const SessionState> next, const std::vector<std::string>& run_ids);

  std::mutex writer_; // serializes every mutation
  mutable std::mutex publish_;
  std::shared_ptr<const SessionState> state_;
  std::set<std::string> inactive_;
  std::optional<std::set<std::string>> configured_scope_;

  std::mutex listeners_mutex_;
  std::map<int, Listener> listeners_;
  int next_listener_ = 0;
};

} // namespace crosscut::session
