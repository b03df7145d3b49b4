#include "crosscut/api/views.hpp"

#include "crosscut/lang/parser.hpp"

#include <algorithm>

namespace crosscut::api {

namespace {

using analysis::CallTree;
using analysis::TreeNode;

json method_json(const lang::MethodId& method) { return {{"module", method.module_path}, {"name", method.function_name}}; }

json span_json(const lang::SourceSpan& span) {
  return {{"module", span.module_path},
          {"start_line", span.start_line},
          {"start_col", span.start_col},
          {"end_line", span.end_line},
          {"end_col", span.end_col}};
}

const char* node_type_name(analysis::NodeType type) {
  switch (type) {
  case analysis::NodeType::Root: return "root";
  case analysis::NodeType::Invocation: return "invocation";
  case analysis::NodeType::ProbeHit: return "probe";
  }
  return "invocation";
}

// Node fields without children.
json node_json(const session::Run& run, const TreeNode& node) {
  const CallTree& tree = *run.tree;
  json out{{"seq", node.seq()},
           {"type", node_type_name(node.type)},
           {"label", tree.label(node)},
           {"depth", node.depth},
           {"frame", node.frame},
           {"child_count", node.children.size()}};
  if (node.is_hit()) {
    out["probe"] = *node.probe_id;
    out["value"] = trace::to_json(node.value);
    const auto* info = run.probes->find(*node.probe_id);
    out["excerpt"] = info ? info->source_excerpt : std::string();
    return out;
  }
  out["method"] = method_json(*node.method);
  out["enter_seq"] = node.enter_seq;
  out["exit_seq"] = node.exit_seq;
  out["exit_kind"] = std::string(trace::exit_kind_name(node.exit_kind));
  json args = json::array();
  for (const auto& a : node.args) args.push_back(trace::to_json(a));
  out["args"] = std::move(args);
  out["result"] = trace::to_json(node.result);
  out["call_site"] = node.call_site;
  return out;
}

const TreeNode& require_node(const session::Run& run, trace::Seq seq) {
  const TreeNode* node = run.tree->by_seq(seq);
  if (node == nullptr) {
    throw Error(ErrorCode::UnknownNode, "run '" + run.run_id + "' has no node with seq " + std::to_string(seq));
  }
  return *node;
}

void check_target(const session::Run& run, const analysis::Target& target) {
  if (target.kind == analysis::Target::Kind::Probe) {
    if (run.probes->find(target.probe_id) == nullptr && run.tree->hits_of(target.probe_id).empty()) {
      throw Error(ErrorCode::UnknownTarget, "unknown probe '" + target.probe_id + "'");
    }
    return;
  }
  const bool invoked = !run.tree->invocations_of(target.method).empty();
  const bool declared = run.program != nullptr && run.program->find_function(target.method) != nullptr;
  if (!invoked && !declared) {
    throw Error(ErrorCode::UnknownTarget, "unknown method '" + target.method.qualified() + "'");
  }
}

json hit_ref(const TreeNode* hit) {
  if (hit == nullptr) return nullptr;
  return {{"seq", hit->seq()}, {"probe", *hit->probe_id}, {"value", trace::to_json(hit->value)}};
}

} // namespace

json error_json(const Error& error) {
  json out{{"code", std::string(error.code_name())}, {"message", error.what()}};
  if (const auto* parse = dynamic_cast<const lang::ParseError*>(&error)) {
    out["detail"] = {{"span", span_json(parse->span())}, {"reason", parse->detail()}};
  }
  return out;
}

json error_json(ErrorCode code, const std::string& message) {
  return {{"code", std::string(error_code_name(code))}, {"message", message}};
}

int http_status(ErrorCode code) {
  switch (code) {
  case ErrorCode::UnknownExample:
  case ErrorCode::UnknownRun:
  case ErrorCode::UnknownNode:
  case ErrorCode::UnknownTarget: return 404;
  case ErrorCode::ExampleInactive: return 409;
  case ErrorCode::ParseError:
  case ErrorCode::AnnotationError:
  case ErrorCode::MalformedTrace:
  case ErrorCode::RuntimeError:
  case ErrorCode::Unmeasurable: return 422;
  case ErrorCode::OrdinalOutOfRange:
  case ErrorCode::InvalidScope:
  case ErrorCode::BadRequest: return 400;
  case ErrorCode::NoSources:
  case ErrorCode::Io:
  case ErrorCode::PortInUse: return 500;
  }
  return 500;
}

const session::Run& require_run(const session::SessionState& state, const std::string& run_id) {
  const auto* run = state.find_run(run_id);
  if (run == nullptr) {
    throw Error(ErrorCode::UnknownRun, "unknown run '" + run_id + "'");
  }
  return *run;
}

const session::Run& latest_run(const session::SessionState& state, const std::string& example_id) {
  auto it = state.latest.find(example_id);
  if (it == state.latest.end()) {
    throw Error(ErrorCode::UnknownRun, "example '" + example_id + "' has no run");
  }
  return *it->second;
}

std::string resolve_example(const session::SessionState& state, const std::string& name) {
  if (state.find_example(name) != nullptr) return name;
  std::string found;
  for (const auto& example : state.annotations.examples) {
    if (example.name != name) continue;
    if (!found.empty()) {
      throw Error(ErrorCode::UnknownExample, "example name '" + name + "' is ambiguous; use <module>#<name>");
    }
    found = example.example_id;
  }
  if (found.empty()) throw Error(ErrorCode::UnknownExample, "unknown example '" + name + "'");
  return found;
}

json examples_json(const session::SessionState& state) {
  json list = json::array();
  for (const auto& example : state.annotations.examples) {
    json item{{"example_id", example.example_id},
              {"name", example.name},
              {"module", example.module_path},
              {"active", example.active},
              {"run_id", nullptr},
              {"stale", false}};
    if (auto it = state.latest.find(example.example_id); it != state.latest.end()) {
      item["run_id"] = it->second->run_id;
      item["stale"] = state.is_stale(*it->second);
    }
    list.push_back(std::move(item));
  }
  json broken = json::array();
  for (const auto& b : state.broken) {
    broken.push_back({{"module", b.path}, {"message", b.message}, {"span", span_json(b.span)}});
  }
  json scope = json::array();
  for (const auto& m : state.scope.included_modules) scope.push_back(m);
  json modules = json::array();
  for (const auto& s : state.sources) modules.push_back(s.path);
  return {{"generation", state.generation},
          {"examples", std::move(list)},
          {"modules", std::move(modules)},
          {"scope", std::move(scope)},
          {"broken", std::move(broken)}};
}

json run_summary_json(const session::SessionState& state, const session::Run& run) {
  const auto& t = *run.trace;
  json out{{"run_id", run.run_id},
           {"example_id", run.example_id},
           {"status", std::string(trace::trace_status_name(t.status))},
           {"generation", run.generation},
           {"stale", state.is_stale(run)},
           {"imported", run.imported},
           {"event_count", t.events.size()},
           {"node_count", run.tree->size()},
           {"traced_duration_ms", t.traced_duration_ms},
           {"output", t.output},
           {"failure", nullptr}};
  if (t.failure) {
    out["failure"] = {{"phase", t.failure->phase},
                      {"kind", t.failure->kind},
                      {"message", t.failure->message},
                      {"span", span_json(t.failure->span)}};
  }
  return out;
}

json runs_json(const session::SessionState& state) {
  json list = json::array();
  for (const auto& [id, run] : state.runs) list.push_back(run_summary_json(state, *run));
  return {{"runs", std::move(list)}};
}

json tree_json(const session::Run& run, const TreeQuery& query) {
  const CallTree& tree = *run.tree;
  std::vector<analysis::Visibility> visibility;
  if (query.filter) visibility = analysis::filter_visibility(tree, *query.filter, run.probes.get());
  const TreeNode& start = query.children_of ? require_node(run, *query.children_of) : tree.root();
  if (query.depth && *query.depth < 0) throw Error(ErrorCode::BadRequest, "depth must be >= 0");

  std::function<json(const TreeNode&, int)> render = [&](const TreeNode& node, int level) {
    json out = node_json(run, node);
    if (query.filter) {
      out["match"] = visibility[node.index].matching;
      out["visible"] = visibility[node.index].visible;
    }
    if (query.depth && level >= *query.depth) {
      out["expanded"] = node.children.empty();
      return out;
    }
    json children = json::array();
    for (auto c : node.children) children.push_back(render(tree.node(c), level + 1));
    out["children"] = std::move(children);
    out["expanded"] = true;
    return out;
  };
  json out{{"run_id", run.run_id}, {"example_id", run.example_id}, {"root", render(start, 0)}};
  if (query.filter) out["filter"] = *query.filter;
  return out;
}

json procedures_json(const session::Run& run) {
  json list = json::array();
  for (const auto& p : analysis::procedure_set(*run.tree)) {
    list.push_back({{"method", method_json(p.method)}, {"invocations", p.invocations}});
  }
  return {{"run_id", run.run_id}, {"procedures", std::move(list)}};
}

json annotations_json(const session::Run& run) {
  json list = json::array();
  for (const auto& a : analysis::annotation_set(*run.tree, *run.probes)) {
    const auto* info = run.probes->find(a.probe_id);
    list.push_back({{"probe_id", a.probe_id},
                    {"hits", a.hits},
                    {"excerpt", info ? info->source_excerpt : std::string()},
                    {"method", info ? method_json(info->enclosing_method) : json(nullptr)}});
  }
  return {{"run_id", run.run_id}, {"annotations", std::move(list)}};
}

json paths_json(const session::Run& run, const analysis::Target& target, PathMode mode) {
  check_target(run, target);
  const CallTree& tree = *run.tree;
  const auto summary = analysis::summarize_paths(tree, target);
  json out{{"run_id", run.run_id},
           {"target", target.to_string()},
           {"mode", mode == PathMode::Summarized ? "summarized" : "detailed"},
           {"total_occurrences", summary.total_occurrences},
           {"common_ancestor_depth", summary.common_ancestor_depth},
           {"context_sensitive_ancestor", summary.context_sensitive_ancestor}};
  json paths = json::array();
  if (mode == PathMode::Summarized) {
    for (const auto& p : summary.paths) {
      json methods = json::array();
      for (const auto& m : p.methods) methods.push_back(method_json(m));
      paths.push_back({{"methods", std::move(methods)},
                       {"hit_count", p.hit_count},
                       {"member_seqs", p.member_seqs},
                       {"color_index", p.color_index}});
    }
  } else {
    std::map<trace::Seq, std::size_t> color;
    for (const auto& p : summary.paths) {
      for (auto s : p.member_seqs) color[s] = p.color_index;
    }
    for (const auto& p : analysis::detailed_paths(tree, target)) {
      json frames = json::array();
      for (const auto* f : p.frames) frames.push_back({{"frame", f->frame}, {"seq", f->seq()}, {"method", method_json(*f->method)}});
      json terminal{{"seq", p.terminal->seq()}, {"type", node_type_name(p.terminal->type)}};
      if (p.terminal->is_hit()) {
        terminal["value"] = trace::to_json(p.terminal->value);
      } else {
        terminal["result"] = trace::to_json(p.terminal->result);
        terminal["exit_kind"] = std::string(trace::exit_kind_name(p.terminal->exit_kind));
      }
      paths.push_back({{"frames", std::move(frames)}, {"terminal", std::move(terminal)}, {"color_index", color.at(p.terminal->seq())}});
    }
  }
  out["paths"] = std::move(paths);
  return out;
}

json probe_values_json(const session::Run& run, const std::string& probe_id, std::size_t offset,
                       std::size_t limit) {
  const auto target = analysis::Target::probe(probe_id);
  check_target(run, target);
  const auto summary = analysis::summarize_paths(*run.tree, target);
  const auto all = analysis::probe_values(*run.tree, probe_id, summary);
  json values = json::array();
  const std::size_t end = offset + std::min(limit, all.size() - std::min(offset, all.size()));
  for (std::size_t i = offset; i < end; ++i) {
    const auto& v = all[i];
    values.push_back({{"value", trace::to_json(v.value)}, {"seq", v.seq}, {"path_color_index", v.path_color_index}});
  }
  const auto* info = run.probes->find(probe_id);
  return {{"run_id", run.run_id},
          {"probe_id", probe_id},
          {"excerpt", info ? info->source_excerpt : std::string()},
          {"total", all.size()},
          {"offset", offset},
          {"next_offset", end < all.size() ? json(end) : json(nullptr)},
          {"values", std::move(values)}};
}

json probe_log_json(const session::Run& run) {
  json entries = json::array();
  for (const auto& e : analysis::probe_log(*run.tree)) {
    entries.push_back({{"probe_id", e.probe_id}, {"seq", e.seq}, {"value", trace::to_json(e.value)}});
  }
  return {{"run_id", run.run_id}, {"entries", std::move(entries)}};
}

json succession_json(const session::Run& run, trace::Seq seq) {
  const TreeNode& node = require_node(run, seq);
  if (!node.is_hit()) throw Error(ErrorCode::BadRequest, "node " + std::to_string(seq) + " is not a probe hit");
  const auto s = analysis::value_succession(*run.tree, node, *run.probes);
  return {{"run_id", run.run_id}, {"seq", seq}, {"prev", hit_ref(s.prev)}, {"next", hit_ref(s.next)}};
}

json callees_json(const session::Run& run, trace::Seq seq) {
  const TreeNode& node = require_node(run, seq);
  if (node.is_hit()) throw Error(ErrorCode::BadRequest, "node " + std::to_string(seq) + " is a probe hit");
  json methods = json::array();
  for (const auto& m : analysis::callees_recursive(*run.tree, node)) methods.push_back(method_json(m));
  return {{"run_id", run.run_id}, {"seq", seq}, {"methods", std::move(methods)}};
}

json find_json(const session::Run& run, const lang::MethodId& method, trace::Seq from, analysis::Direction direction) {
  const TreeNode* found = analysis::find_invocation(*run.tree, from, method, direction);
  return {{"run_id", run.run_id},
          {"method", method_json(method)},
          {"from", from},
          {"dir", direction == analysis::Direction::Next ? "next" : "prev"},
          {"node", found ? node_json(run, *found) : json(nullptr)}};
}

json source_json(const session::SessionState& state, const std::string& module) {
  auto it = std::find_if(state.sources.begin(), state.sources.end(), [&](const auto& s) { return s.path == module; });
  if (it == state.sources.end()) {
    throw Error(ErrorCode::BadRequest, "unknown module '" + module + "'");
  }
  json out{{"module", module}, {"text", it->text}, {"broken", nullptr}};
  for (const auto& b : state.broken) {
    if (b.path == module) out["broken"] = {{"message", b.message}, {"span", span_json(b.span)}};
  }
  json functions = json::array();
  json probes = json::array();
  json examples = json::array();
  if (state.program != nullptr && out["broken"].is_null()) {
    if (const auto* m = state.program->find_module(module)) {
      for (const auto* decl : m->functions) {
        functions.push_back({{"name", decl->name}, {"span", span_json(decl->span)}});
      }
    }
    for (const auto& p : state.annotations.probes) {
      if (p.anchor->span.module_path != module) continue;
      probes.push_back({{"probe_id", p.probe_id},
                        {"span", span_json(p.anchor->span)},
                        {"excerpt", p.source_excerpt},
                        {"method", method_json(p.enclosing_method)}});
    }
    for (const auto& e : state.annotations.examples) {
      if (e.module_path == module) examples.push_back({{"example_id", e.example_id}, {"span", span_json(e.decl->span)}});
    }
  }
  out["functions"] = std::move(functions);
  out["probes"] = std::move(probes);
  out["examples"] = std::move(examples);
  return out;
}

} // namespace crosscut::api
