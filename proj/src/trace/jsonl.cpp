#include "crosscut/trace/jsonl.hpp"

#include "crosscut/error.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace crosscut::trace {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json span_json(const lang::SourceSpan& span) {
  return ordered_json{{"module", span.module_path},
                      {"start_line", span.start_line},
                      {"start_col", span.start_col},
                      {"end_line", span.end_line},
                      {"end_col", span.end_col}};
}

ordered_json header_json(const Trace& trace) {
  ordered_json header;
  header["run_id"] = trace.run_id;
  header["example_id"] = trace.example_id;
  header["scope"] = ordered_json{{"modules", trace.scope.included_modules}};
  header["status"] = trace_status_name(trace.status);
  header["traced_duration_ms"] = trace.traced_duration_ms;
  header["base_duration_ms"] = trace.base_duration_ms ? ordered_json(*trace.base_duration_ms) : ordered_json();
  if (trace.failure) {
    const auto& f = *trace.failure;
    ordered_json failure{{"phase", f.phase}, {"kind", f.kind}, {"message", f.message}, {"span", span_json(f.span)}};
    failure["thrown"] = f.thrown ? ordered_json(to_json(*f.thrown)) : ordered_json();
    header["failure"] = std::move(failure);
  } else {
    header["failure"] = nullptr;
  }
  header["output"] = trace.output;
  return header;
}

ordered_json event_json(const TraceEvent& event) {
  ordered_json line;
  line["seq"] = event.seq;
  if (const auto* enter = event.enter()) {
    line["type"] = "enter";
    line["frame"] = enter->frame;
    line["parent"] = enter->parent == kNoFrame ? ordered_json() : ordered_json(enter->parent);
    line["method"] = ordered_json{{"module", enter->method->module_path}, {"name", enter->method->function_name}};
    line["site"] = enter->site;
    ordered_json args = ordered_json::array();
    for (const auto& arg : enter->args) {
      args.push_back(ordered_json(to_json(arg)));
    }
    line["args"] = std::move(args);
  } else if (const auto* exit = event.exit()) {
    line["type"] = "exit";
    line["frame"] = exit->frame;
    line["kind"] = exit_kind_name(exit->kind);
    line["result"] = ordered_json(to_json(exit->result));
  } else if (const auto* hit = event.probe()) {
    line["type"] = "probe";
    line["probe"] = *hit->probe_id;
    line["frame"] = hit->frame;
    line["value"] = ordered_json(to_json(hit->value));
  }
  return line;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
  throw Error(ErrorCode::MalformedTrace, "line " + std::to_string(line_no) + ": " + why);
}

template <typename T>
T field(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    malformed(line_no, std::string("missing field '") + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    malformed(line_no, std::string("field '") + key + "' has the wrong type");
  }
}

lang::SourceSpan parse_span(const json& j, std::size_t line_no) {
  lang::SourceSpan span;
  span.module_path = field<std::string>(j, "module", line_no);
  span.start_line = field<int>(j, "start_line", line_no);
  span.start_col = field<int>(j, "start_col", line_no);
  span.end_line = field<int>(j, "end_line", line_no);
  span.end_col = field<int>(j, "end_col", line_no);
  return span;
}

Snapshot parse_snapshot(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) {
    malformed(line_no, std::string("missing field '") + key + "'");
  }
  try {
    return snapshot_from_json(*it);
  } catch (const std::invalid_argument& e) {
    malformed(line_no, std::string("bad snapshot in '") + key + "': " + e.what());
  }
}

void parse_header(const json& header, Trace& trace) {
  if (!header.is_object()) {
    malformed(1, "header must be an object");
  }
  trace.run_id = field<std::string>(header, "run_id", 1);
  trace.example_id = field<std::string>(header, "example_id", 1);
  const auto scope = field<json>(header, "scope", 1);
  for (const auto& module : field<std::vector<std::string>>(scope, "modules", 1)) {
    trace.scope.included_modules.insert(module);
  }
  const auto status = parse_trace_status(field<std::string>(header, "status", 1));
  if (!status) {
    malformed(1, "unknown status");
  }
  trace.status = *status;
  trace.traced_duration_ms = field<double>(header, "traced_duration_ms", 1);
  if (auto it = header.find("base_duration_ms"); it != header.end() && !it->is_null()) {
    trace.base_duration_ms = field<double>(header, "base_duration_ms", 1);
  }
  if (auto it = header.find("failure"); it != header.end() && !it->is_null()) {
    TraceFailure failure;
    failure.phase = field<std::string>(*it, "phase", 1);
    failure.kind = field<std::string>(*it, "kind", 1);
    failure.message = field<std::string>(*it, "message", 1);
    failure.span = parse_span(field<json>(*it, "span", 1), 1);
    if (auto thrown = it->find("thrown"); thrown != it->end() && !thrown->is_null()) {
      failure.thrown = parse_snapshot(*it, "thrown", 1);
    }
    trace.failure = std::move(failure);
  }
  if (auto it = header.find("output"); it != header.end()) {
    trace.output = field<std::vector<std::string>>(header, "output", 1);
  }
}

TraceEvent parse_event(const json& line, std::size_t line_no,
                       std::map<std::pair<std::string, std::string>, lang::MethodRef>& methods,
                       std::map<std::string, std::shared_ptr<const std::string>>& probes) {
  if (!line.is_object()) {
    malformed(line_no, "event must be an object");
  }
  TraceEvent event;
  event.seq = field<Seq>(line, "seq", line_no);
  const auto type = field<std::string>(line, "type", line_no);
  if (type == "enter") {
    CallEnter enter;
    enter.frame = field<FrameId>(line, "frame", line_no);
    const auto parent = field<json>(line, "parent", line_no);
    enter.parent = parent.is_null() ? kNoFrame : field<FrameId>(line, "parent", line_no);
    const auto method = field<json>(line, "method", line_no);
    auto key = std::make_pair(field<std::string>(method, "module", line_no), field<std::string>(method, "name", line_no));
    auto& ref = methods[key];
    if (!ref) {
      ref = std::make_shared<const lang::MethodId>(lang::MethodId{key.first, key.second});
    }
    enter.method = ref;
    enter.site = field<lang::NodeId>(line, "site", line_no);
    const auto args = field<json>(line, "args", line_no);
    if (!args.is_array()) {
      malformed(line_no, "args must be an array");
    }
    for (const auto& arg : args) {
      try {
        enter.args.push_back(snapshot_from_json(arg));
      } catch (const std::invalid_argument& e) {
        malformed(line_no, std::string("bad argument snapshot: ") + e.what());
      }
    }
    event.data = std::move(enter);
  } else if (type == "exit") {
    CallExit exit;
    exit.frame = field<FrameId>(line, "frame", line_no);
    const auto kind = field<std::string>(line, "kind", line_no);
    if (kind == "normal") {
      exit.kind = ExitKind::Normal;
    } else if (kind == "exception") {
      exit.kind = ExitKind::Exception;
    } else {
      malformed(line_no, "unknown exit kind '" + kind + "'");
    }
    exit.result = parse_snapshot(line, "result", line_no);
    event.data = std::move(exit);
  } else if (type == "probe") {
    ProbeHit hit;
    const auto id = field<std::string>(line, "probe", line_no);
    auto& ref = probes[id];
    if (!ref) {
      ref = std::make_shared<const std::string>(id);
    }
    hit.probe_id = ref;
    hit.frame = field<FrameId>(line, "frame", line_no);
    hit.value = parse_snapshot(line, "value", line_no);
    event.data = std::move(hit);
  } else {
    malformed(line_no, "unknown event type '" + type + "'");
  }
  return event;
}

} // namespace

void write_jsonl(const Trace& trace, std::ostream& out) {
  out << header_json(trace).dump() << '\n';
  for (const auto& event : trace.events) {
    out << event_json(event).dump() << '\n';
  }
}

std::string to_jsonl(const Trace& trace) {
  std::ostringstream out;
  write_jsonl(trace, out);
  return out.str();
}

Trace read_jsonl(std::istream& in) {
  Trace trace;
  std::map<std::pair<std::string, std::string>, lang::MethodRef> methods;
  std::map<std::string, std::shared_ptr<const std::string>> probes;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json parsed;
    try {
      parsed = json::parse(line);
    } catch (const json::parse_error& e) {
      malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!have_header) {
      parse_header(parsed, trace);
      have_header = true;
      continue;
    }
    trace.events.push_back(parse_event(parsed, line_no, methods, probes));
  }
  if (!have_header) {
    throw Error(ErrorCode::MalformedTrace, "empty trace file");
  }
  validate_bracketing(trace);
  return trace;
}

Trace from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return read_jsonl(in);
}

void export_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  }
  write_jsonl(trace, out);
  if (!out) {
    throw Error(ErrorCode::Io, "failed while writing '" + path.string() + "'");
  }
}

Trace import_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  }
  return read_jsonl(in);
}

} // namespace crosscut::trace
