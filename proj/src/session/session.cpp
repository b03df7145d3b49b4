#include "crosscut/session/session.hpp"

#include "crosscut/error.hpp"
#include "crosscut/lang/parser.hpp"
#include "crosscut/trace/tracer.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace crosscut::session {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot read " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<lang::ModuleSource> scan_sources(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::Io, "not a directory: " + root.string());
  }
  std::vector<lang::ModuleSource> out;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".cc") {
      out.push_back({fs::relative(it->path(), root).generic_string(), read_file(it->path())});
    }
  }
  if (ec) {
    throw Error(ErrorCode::Io, "cannot scan " + root.string() + ": " + ec.message());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

SessionConfig read_config(const fs::path& root) {
  const fs::path file = root / kConfigFile;
  std::error_code ec;
  if (!fs::exists(file, ec)) {
    return {};
  }
  return parse_config(read_file(file));
}

void apply_inactive(std::vector<annotations::Example>& examples, const std::set<std::string>& inactive) {
  for (auto& example : examples) {
    example.active = inactive.count(example.example_id) == 0;
  }
}

void check_scope(const SessionState& state, const std::set<std::string>& modules) {
  for (const auto& module : modules) {
    if (state.program == nullptr || state.program->find_module(module) == nullptr) {
      throw Error(ErrorCode::InvalidScope, "unknown module '" + module + "'");
    }
  }
  for (const auto& example : state.annotations.examples) {
    if (modules.count(example.module_path) == 0) {
      throw Error(ErrorCode::InvalidScope, "scope must include '" + example.module_path + "', the module of example '" +
                                               example.example_id + "'");
    }
  }
}

} // namespace

const Run* SessionState::find_run(const std::string& run_id) const {
  auto it = runs.find(run_id);
  return it == runs.end() ? nullptr : it->second.get();
}

const annotations::Example* SessionState::find_example(const std::string& example_id) const {
  return annotations::find_example(annotations.examples, example_id);
}

std::shared_ptr<Session> Session::open(const fs::path& root) {
  std::shared_ptr<Session> session(new Session());
  SessionState state;
  state.root = root;
  const SessionConfig config = read_config(root);
  state.event_cap = config.event_cap;
  session->reload(state, true);
  if (config.active) {
    for (const auto& example : state.annotations.examples) {
      if (config.active->count(example.example_id) == 0) session->inactive_.insert(example.example_id);
    }
    apply_inactive(state.annotations.examples, session->inactive_);
  }
  if (config.scope) {
    check_scope(state, *config.scope);
    session->configured_scope_ = config.scope;
    state.scope.included_modules = *config.scope;
  }
  session->state_ = std::make_shared<const SessionState>(std::move(state));
  return session;
}

std::shared_ptr<Session> Session::for_trace(trace::Trace trace) {
  std::shared_ptr<Session> session(new Session());
  auto state = std::make_shared<SessionState>();
  session->state_ = state;
  session->add_trace(std::move(trace));
  return session;
}

std::shared_ptr<const SessionState> Session::state() const {
  std::lock_guard lock(publish_);
  return state_;
}

void Session::publish(std::shared_ptr<const SessionState> next, const std::vector<std::string>& run_ids) {
  {
    std::lock_guard lock(publish_);
    state_ = std::move(next);
  }
  std::lock_guard lock(listeners_mutex_);
  for (const auto& [id, listener] : listeners_) {
    listener(run_ids);
  }
}

int Session::subscribe(Listener listener) {
  std::lock_guard lock(listeners_mutex_);
  listeners_.emplace(next_listener_, std::move(listener));
  return next_listener_++;
}

void Session::unsubscribe(int id) {
  std::lock_guard lock(listeners_mutex_);
  listeners_.erase(id);
}

std::shared_ptr<Run> Session::execute(const SessionState& state, const annotations::Example& example) const {
  trace::TraceOptions options;
  options.event_cap = state.event_cap;
  auto run = std::make_shared<Run>();
  auto recorded = std::make_shared<trace::Trace>(trace::trace_run(*state.program, example, state.scope, options));
  run->run_id = recorded->run_id;
  run->example_id = example.example_id;
  run->generation = state.generation;
  run->program = state.program;
  run->tree = std::make_shared<const analysis::CallTree>(analysis::build_call_tree(*recorded));
  run->trace = std::move(recorded);
  run->probes = std::make_shared<const analysis::ProbeCatalog>(
      analysis::ProbeCatalog::from_annotations(state.annotations.probes));
  return run;
}

std::vector<std::string> Session::rerun_active(SessionState& next) const {
  std::vector<std::string> ids;
  for (auto it = next.runs.begin(); it != next.runs.end();) {
    it = it->second->imported ? std::next(it) : next.runs.erase(it);
  }
  next.latest.clear();
  for (const auto& example : next.annotations.examples) {
    if (!example.active) continue;
    auto run = execute(next, example);
    ids.push_back(run->run_id);
    next.runs[run->run_id] = run;
    next.latest[example.example_id] = std::move(run);
  }
  return ids;
}

void Session::reload(SessionState& next, bool initial) {
  auto sources = scan_sources(next.root);
  if (sources.empty()) {
    throw Error(ErrorCode::NoSources, "no .cc files under " + next.root.string());
  }
  std::vector<BrokenModule> broken;
  std::vector<lang::ModuleSource> good;
  for (const auto& source : sources) {
    try {
      lang::parse(source.text, source.path);
      good.push_back(source);
    } catch (const lang::ParseError& e) {
      broken.push_back({source.path, e.detail(), e.span()});
    }
  }

  next.generation += 1;
  next.sources = std::move(sources);
  next.broken = std::move(broken);
  if (!initial && !next.broken.empty()) {
    return; // keep the last good program; its runs are now stale
  }

  auto program = lang::SourceProgram::parse(std::move(good));
  auto extracted = annotations::extract_annotations(*program);
  apply_inactive(extracted.examples, inactive_);
  next.program = std::move(program);
  next.program_generation = next.generation;
  next.annotations = std::move(extracted);
  next.scope = configured_scope_ ? trace::TraceScope{*configured_scope_, true} : trace::full_scope(*next.program);
}

std::string Session::run_example(const std::string& example_id) {
  std::lock_guard lock(writer_);
  auto current = state();
  const auto* example = current->find_example(example_id);
  if (example == nullptr) {
    throw Error(ErrorCode::UnknownExample, "unknown example '" + example_id + "'");
  }
  if (!example->active) {
    throw Error(ErrorCode::ExampleInactive, "example '" + example_id + "' is inactive");
  }
  auto next = std::make_shared<SessionState>(*current);
  auto run = execute(*next, *example);
  const std::string id = run->run_id;
  if (auto old = next->latest.find(example_id); old != next->latest.end()) {
    next->runs.erase(old->second->run_id);
  }
  next->runs[id] = run;
  next->latest[example_id] = std::move(run);
  publish(std::move(next), {id});
  return id;
}

std::vector<std::string> Session::run_all() {
  std::lock_guard lock(writer_);
  auto next = std::make_shared<SessionState>(*state());
  if (next->program == nullptr) return {};
  auto ids = rerun_active(*next);
  publish(std::move(next), ids);
  return ids;
}

std::vector<std::string> Session::notify_change(const std::string&) {
  std::lock_guard lock(writer_);
  auto next = std::make_shared<SessionState>(*state());
  reload(*next, false);
  std::vector<std::string> ids;
  if (next->broken.empty()) {
    ids = rerun_active(*next);
  }
  publish(std::move(next), ids);
  return ids;
}

std::vector<std::string> Session::set_scope(const std::set<std::string>& modules) {
  std::lock_guard lock(writer_);
  auto next = std::make_shared<SessionState>(*state());
  check_scope(*next, modules);
  configured_scope_ = modules;
  next->scope = trace::TraceScope{modules, true};
  auto ids = rerun_active(*next);
  publish(std::move(next), ids);
  return ids;
}

std::optional<std::string> Session::set_active(const std::string& example_id, bool active) {
  std::lock_guard lock(writer_);
  auto next = std::make_shared<SessionState>(*state());
  next->annotations.examples = annotations::set_active(next->annotations.examples, example_id, active);
  if (active) {
    inactive_.erase(example_id);
  } else {
    inactive_.insert(example_id);
  }
  std::optional<std::string> id;
  if (auto old = next->latest.find(example_id); old != next->latest.end()) {
    next->runs.erase(old->second->run_id);
    next->latest.erase(old);
  }
  if (active && next->broken.empty()) {
    auto run = execute(*next, *next->find_example(example_id));
    id = run->run_id;
    next->runs[*id] = run;
    next->latest[example_id] = std::move(run);
  }
  publish(std::move(next), id ? std::vector<std::string>{*id} : std::vector<std::string>{});
  return id;
}

std::string Session::add_trace(trace::Trace recorded) {
  std::lock_guard lock(writer_);
  auto next = std::make_shared<SessionState>(*state());
  auto run = std::make_shared<Run>();
  run->imported = true;
  run->example_id = recorded.example_id;
  // a fresh id: the recorded one may collide with runs of this process
  run->run_id = trace::next_run_id();
  recorded.run_id = run->run_id;
  run->generation = next->generation;
  run->tree = std::make_shared<const analysis::CallTree>(analysis::build_call_tree(recorded));
  run->probes = std::make_shared<const analysis::ProbeCatalog>(analysis::ProbeCatalog::derive(*run->tree));
  run->trace = std::make_shared<const trace::Trace>(std::move(recorded));
  const std::string id = run->run_id;
  next->runs[id] = std::move(run);
  publish(std::move(next), {id});
  return id;
}

} // namespace crosscut::session
