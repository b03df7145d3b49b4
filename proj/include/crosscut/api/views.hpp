#pragma once

// JSON renderings of session data. The HTTP service returns these documents
// verbatim and the CLI prints text derived from them, so both agree.

#include "crosscut/error.hpp"
#include "crosscut/session/session.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace crosscut::api {

using nlohmann::json;

// {code, message[, detail]}
json error_json(const Error& error);
json error_json(ErrorCode code, const std::string& message);
int http_status(ErrorCode code);

json examples_json(const session::SessionState& state);
json run_summary_json(const session::SessionState& state, const session::Run& run);
json runs_json(const session::SessionState& state);

struct TreeQuery {
  std::optional<std::string> filter;
  std::optional<int> depth;        // levels below the start node; unlimited when absent
  std::optional<trace::Seq> children_of; // start at this node instead of the root
};
json tree_json(const session::Run& run, const TreeQuery& query);

json procedures_json(const session::Run& run);
json annotations_json(const session::Run& run);

enum class PathMode { Summarized, Detailed };
// Throws Error(UnknownTarget) when the target names neither a known probe
// nor an invoked or declared method.
json paths_json(const session::Run& run, const analysis::Target& target, PathMode mode);
// Values are paged; `next_offset` is null on the last page.
inline constexpr std::size_t kProbeValuePage = 50;
json probe_values_json(const session::Run& run, const std::string& probe_id, std::size_t offset = 0,
                       std::size_t limit = kProbeValuePage);
json probe_log_json(const session::Run& run);
// Throw Error(UnknownNode) for unknown seqs, Error(BadRequest) for the wrong
// node type.
json succession_json(const session::Run& run, trace::Seq seq);
json callees_json(const session::Run& run, trace::Seq seq);
json find_json(const session::Run& run, const lang::MethodId& method, trace::Seq from, analysis::Direction direction);
json source_json(const session::SessionState& state, const std::string& module);

// Lookup helpers shared by the server and the CLI.
const session::Run& require_run(const session::SessionState& state, const std::string& run_id);
const session::Run& latest_run(const session::SessionState& state, const std::string& example_id);
// Accepts a full example id or a bare example name when it is unambiguous.
std::string resolve_example(const session::SessionState& state, const std::string& name);

} // namespace crosscut::api
