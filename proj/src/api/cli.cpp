#include "crosscut/api/cli.hpp"

#include "crosscut/api/server.hpp"
#include "crosscut/api/views.hpp"
#include "crosscut/session/watcher.hpp"
#include "crosscut/trace/jsonl.hpp"
#include "crosscut/trace/tracer.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <iomanip>
#include <ostream>
#include <thread>

namespace crosscut::api {

namespace {

std::atomic<bool> g_interrupted{false};

std::string value_text(const json& value) { return value.dump(); }

std::string method_text(const json& method) {
  const std::string name = method["name"];
  // root labels are "#name"; show them as the example id
  return method["module"].get<std::string>() + (name.rfind('#', 0) == 0 ? "" : ".") + name;
}

std::string node_line(const json& node) {
  const std::string type = node["type"];
  if (type == "probe") {
    std::string line = node["probe"].get<std::string>() + " = " + value_text(node["value"]);
    if (!node["excerpt"].get<std::string>().empty()) line += "   (" + node["excerpt"].get<std::string>() + ")";
    return line;
  }
  if (type == "root") {
    std::string line = node["label"].get<std::string>() + "  #0";
    if (node["exit_kind"] == "exception") line += "  [exception " + value_text(node["result"]) + "]";
    return line;
  }
  std::string args;
  for (const auto& a : node["args"]) args += (args.empty() ? "" : ", ") + value_text(a);
  std::string line = method_text(node["method"]) + "(" + args + ")";
  line += node["exit_kind"] == "exception" ? " !! " + value_text(node["result"]) + "  [exception]"
                                           : " -> " + value_text(node["result"]);
  return line + "  #" + std::to_string(node["frame"].get<long long>());
}

void print_tree(std::ostream& out, const json& node, const std::string& prefix, bool last, bool top, bool filtered,
                int max_depth, int level) {
  if (filtered && !node.value("visible", true)) return;
  std::string line = top ? "" : prefix + (last ? "`-- " : "|-- ");
  line += node_line(node);
  if (filtered && node.value("match", false)) line += "  *";
  const bool cut = level >= max_depth || !node.contains("children");
  const auto count = node["child_count"].get<std::size_t>();
  if (cut && count > 0) line += "  [+" + std::to_string(count) + "]";
  out << line << '\n';
  if (cut) return;
  std::vector<const json*> children;
  for (const auto& c : node["children"]) {
    if (!filtered || c.value("visible", true)) children.push_back(&c);
  }
  const std::string next = top ? "" : prefix + (last ? "    " : "|   ");
  for (std::size_t i = 0; i < children.size(); ++i) {
    print_tree(out, *children[i], next, i + 1 == children.size(), false, filtered, max_depth, level + 1);
  }
}

void print_paths(std::ostream& out, const json& doc) {
  out << "target " << doc["target"].get<std::string>() << ": " << doc["total_occurrences"] << " occurrence(s), "
      << doc["paths"].size() << " " << doc["mode"].get<std::string>() << " path(s), common ancestor depth "
      << doc["common_ancestor_depth"] << ", context-sensitive ancestor #" << doc["context_sensitive_ancestor"] << '\n';
  const auto depth = doc["common_ancestor_depth"].get<std::size_t>();
  for (const auto& p : doc["paths"]) {
    std::string line = "[" + std::to_string(p["color_index"].get<std::size_t>()) + "] ";
    if (doc["mode"] == "summarized") {
      line += "x" + std::to_string(p["hit_count"].get<std::size_t>()) + "  ";
      for (std::size_t i = 0; i < p["methods"].size(); ++i) {
        std::string name = method_text(p["methods"][i]);
        if (i < depth) name = "{" + name + "}"; // shared prefix
        line += (i ? " > " : "") + name;
      }
    } else {
      const auto& t = p["terminal"];
      line += "seq " + std::to_string(t["seq"].get<long long>()) + "  ";
      for (std::size_t i = 0; i < p["frames"].size(); ++i) {
        const auto& f = p["frames"][i];
        line += (i ? " > " : "") + method_text(f["method"]) + "#" + std::to_string(f["frame"].get<long long>());
      }
      line += t.contains("value") ? "  = " + value_text(t["value"]) : "  -> " + value_text(t["result"]);
    }
    out << line << '\n';
  }
}

void print_summary(std::ostream& out, const json& summary) {
  out << "run " << summary["run_id"].get<std::string>() << "  " << summary["example_id"].get<std::string>() << "  "
      << summary["status"].get<std::string>() << "  " << summary["event_count"] << " events" << '\n';
  if (!summary["failure"].is_null()) {
    const auto& f = summary["failure"];
    out << "failed in " << f["phase"].get<std::string>() << ": " << f["kind"].get<std::string>() << ": "
        << f["message"].get<std::string>() << '\n';
  }
}

// Where a tree/paths command reads its run from.
struct RunSource {
  std::string example;
  std::string trace_file;
};

struct Loaded {
  std::shared_ptr<session::Session> session;
  std::shared_ptr<const session::SessionState> state;
  const session::Run* run = nullptr;
};

Loaded load_run(const std::string& root, const RunSource& source) {
  Loaded out;
  if (!source.trace_file.empty()) {
    out.session = session::Session::for_trace(trace::import_trace(source.trace_file));
    out.state = out.session->state();
    out.run = out.state->runs.begin()->second.get();
    return out;
  }
  if (source.example.empty()) throw Error(ErrorCode::BadRequest, "name an example or pass --trace");
  out.session = session::Session::open(root);
  const auto id = resolve_example(*out.session->state(), source.example);
  const auto run_id = out.session->run_example(id);
  out.state = out.session->state();
  out.run = &require_run(*out.state, run_id);
  return out;
}

lang::MethodId resolve_method(const session::Run& run, const std::string& text) {
  if (text.find('/') != std::string::npos) return analysis::parse_method(text);
  std::vector<lang::MethodId> found;
  for (const auto& m : run.tree->methods()) {
    if (m.function_name == text || m.qualified() == text) found.push_back(m);
  }
  if (run.program) {
    for (const auto& [m, decl] : run.program->functions()) {
      if ((m.function_name == text || m.qualified() == text) && std::find(found.begin(), found.end(), m) == found.end()) {
        found.push_back(m);
      }
    }
  }
  if (found.size() != 1) {
    throw Error(found.empty() ? ErrorCode::UnknownTarget : ErrorCode::BadRequest,
                "cannot resolve method '" + text + "'; use <module>/<name>");
  }
  return found.front();
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Live call-trace views for example-driven programming"};
  app.require_subcommand(1);
  std::string root = ".";
  app.add_option("--root", root, "Project directory")->capture_default_str();

  RunSource source;
  bool as_json = false;

  auto* run_cmd = app.add_subcommand("run", "Run an example and print its probe log");
  run_cmd->add_option("example", source.example, "Example id or name")->required();

  std::optional<std::string> filter;
  bool collapsed = false;
  int depth = -1;
  auto* tree_cmd = app.add_subcommand("tree", "Print the call tree of an example run");
  tree_cmd->add_option("example", source.example, "Example id or name");
  tree_cmd->add_option("--trace", source.trace_file, "Analyze an exported trace instead");
  tree_cmd->add_option("--filter", filter, "Show only matching nodes and their ancestors");
  tree_cmd->add_flag("--collapsed", collapsed, "Show the root and its direct children only");
  tree_cmd->add_option("--depth", depth, "Levels to expand");
  tree_cmd->add_flag("--json", as_json, "Print the JSON document served by the API");

  std::string probe;
  std::string method;
  bool summarized = false;
  bool detailed = false;
  auto* paths_cmd = app.add_subcommand("paths", "Print invocation paths leading to a probe or method");
  paths_cmd->add_option("example", source.example, "Example id or name");
  paths_cmd->add_option("--trace", source.trace_file, "Analyze an exported trace instead");
  auto* probe_opt = paths_cmd->add_option("--probe", probe, "Probe id, e.g. m.cc:1:17");
  auto* method_opt = paths_cmd->add_option("--method", method, "Method as <module>/<name> or a unique name");
  probe_opt->excludes(method_opt);
  auto* sum_flag = paths_cmd->add_flag("--summarized", summarized, "Group paths by method sequence (default)");
  auto* det_flag = paths_cmd->add_flag("--detailed", detailed, "One path per occurrence");
  sum_flag->excludes(det_flag);
  paths_cmd->add_flag("--json", as_json, "Print the JSON document served by the API");

  int watch_ms = -1;
  auto* watch_cmd = app.add_subcommand("watch", "Re-run active examples whenever sources change");
  watch_cmd->add_option("--for-ms", watch_ms, "Stop after this many milliseconds");

  int port = 8080;
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API (CROSSCUT_PORT overrides --port)");
  serve_cmd->add_option("--port", port, "Port")->capture_default_str();
  serve_cmd->add_option("--host", host, "Interface to bind")->capture_default_str();

  std::string output;
  auto* export_cmd = app.add_subcommand("export", "Run an example and write its trace as JSONL");
  export_cmd->add_option("example", source.example, "Example id or name")->required();
  export_cmd->add_option("-o,--output", output, "Output file")->required();

  std::string import_file;
  auto* import_cmd = app.add_subcommand("import", "Validate an exported trace and print its summary and tree");
  import_cmd->add_option("file", import_file, "JSONL trace file")->required();
  import_cmd->add_flag("--json", as_json, "Print the JSON tree document");

  auto* overhead_cmd = app.add_subcommand("overhead", "Measure the tracing slowdown of an example");
  overhead_cmd->add_option("example", source.example, "Example id or name")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      auto session = session::Session::open(root);
      const auto id = resolve_example(*session->state(), source.example);
      const auto run_id = session->run_example(id);
      const auto state = session->state();
      const auto& run = require_run(*state, run_id);
      print_summary(out, run_summary_json(*state, run));
      const json log = probe_log_json(run);
      for (const auto& e : log["entries"]) {
        out << "  [" << e["seq"] << "] " << e["probe_id"].get<std::string>() << " = " << value_text(e["value"]) << '\n';
      }
      for (const auto& line : run.trace->output) out << "output: " << line << '\n';
      return 0;
    }

    if (tree_cmd->parsed()) {
      const auto loaded = load_run(root, source);
      TreeQuery query;
      query.filter = filter;
      if (collapsed) query.depth = 1;
      if (depth >= 0) query.depth = depth;
      const json doc = tree_json(*loaded.run, query);
      if (as_json) {
        out << doc.dump(2) << '\n';
      } else {
        print_tree(out, doc["root"], "", true, true, filter.has_value(), query.depth.value_or(1 << 30), 0);
      }
      return 0;
    }

    if (paths_cmd->parsed()) {
      if (probe.empty() && method.empty()) throw CLI::RequiredError("--probe or --method");
      const auto loaded = load_run(root, source);
      const auto target = probe.empty() ? analysis::Target::of_method(resolve_method(*loaded.run, method))
                                        : analysis::Target::probe(probe);
      const json doc = paths_json(*loaded.run, target, detailed ? PathMode::Detailed : PathMode::Summarized);
      if (as_json) {
        out << doc.dump(2) << '\n';
      } else {
        print_paths(out, doc);
      }
      return 0;
    }

    if (export_cmd->parsed()) {
      auto session = session::Session::open(root);
      const auto id = resolve_example(*session->state(), source.example);
      const auto run_id = session->run_example(id);
      const auto state = session->state();
      const auto& run = require_run(*state, run_id);
      trace::export_trace(*run.trace, output);
      out << "wrote " << run.trace->events.size() << " events to " << output << '\n';
      return 0;
    }

    if (import_cmd->parsed()) {
      const auto loaded = load_run(root, RunSource{{}, import_file});
      const json doc = tree_json(*loaded.run, {});
      if (as_json) {
        out << doc.dump(2) << '\n';
      } else {
        print_summary(out, run_summary_json(*loaded.state, *loaded.run));
        print_tree(out, doc["root"], "", true, true, false, 1 << 30, 0);
      }
      return 0;
    }

    if (overhead_cmd->parsed()) {
      auto session = session::Session::open(root);
      const auto state = session->state();
      const auto id = resolve_example(*state, source.example);
      const auto report = trace::measure_overhead(*state->program, *state->find_example(id), state->scope);
      out << std::fixed << std::setprecision(2) << "untraced " << report.base_ms << " ms, traced " << report.traced_ms
          << " ms, factor " << report.factor << "x\n";
      return 0;
    }

    if (watch_cmd->parsed() || serve_cmd->parsed()) {
      auto session = session::Session::open(root);
      for (const auto& b : session->state()->broken) err << "broken: " << b.path << ": " << b.message << '\n';
      auto report_runs = [&out, session](const std::vector<std::string>& ids) {
        const auto state = session->state();
        for (const auto& id : ids) {
          if (const auto* run = state->find_run(id)) print_summary(out, run_summary_json(*state, *run));
        }
        out.flush();
      };
      report_runs(session->run_all());
      session::FileWatcher watcher(session, std::chrono::milliseconds(150), std::chrono::milliseconds(25),
                                   [&, session](const std::vector<std::string>& ids, const std::string& error) {
                                     if (!error.empty()) {
                                       err << "reload failed: " << error << '\n';
                                       return;
                                     }
                                     const auto state = session->state();
                                     for (const auto& b : state->broken) {
                                       err << "broken: " << b.path << ": " << b.message << " (runs are stale)\n";
                                     }
                                     report_runs(ids);
                                   });
      watcher.start();
      if (serve_cmd->parsed()) {
        Server server(session);
        const int bound = server.bind(host, port_from_env(port));
        out << "serving on http://" << host << ":" << bound << '\n';
        out.flush();
        server.listen();
        return 0;
      }
      g_interrupted = false;
      auto previous = std::signal(SIGINT, [](int) { g_interrupted = true; });
      const auto start = std::chrono::steady_clock::now();
      while (!g_interrupted &&
             (watch_ms < 0 || std::chrono::steady_clock::now() - start < std::chrono::milliseconds(watch_ms))) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      std::signal(SIGINT, previous);
      watcher.stop();
      return 0;
    }
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.code_name() << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}

} // namespace crosscut::api
