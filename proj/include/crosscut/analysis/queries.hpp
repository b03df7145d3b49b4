#pragma once

#include "crosscut/analysis/call_tree.hpp"
#include "crosscut/annotations/annotations.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace crosscut::analysis {

// Static facts about probes needed by some views.
struct ProbeInfo {
  lang::MethodId enclosing_method;
  std::string source_excerpt;
};

class ProbeCatalog {
public:
  static ProbeCatalog from_annotations(const std::vector<annotations::Probe>& probes);
  // For traces without source: a probe's method is taken from the frame of
  // its first hit and excerpts are empty.
  static ProbeCatalog derive(const CallTree& tree);

  const ProbeInfo* find(const std::string& probe_id) const;
  // Probe ids in declaration (or first-hit) order.
  const std::vector<std::string>& ids() const { return order_; }

  void add(const std::string& probe_id, ProbeInfo info);

private:
  std::map<std::string, ProbeInfo> info_;
  std::vector<std::string> order_;
};

struct Target {
  enum class Kind { Probe, Method };
  Kind kind = Kind::Probe;
  std::string probe_id;
  lang::MethodId method;

  static Target probe(std::string id) { return Target{Kind::Probe, std::move(id), {}}; }
  static Target of_method(lang::MethodId m) { return Target{Kind::Method, {}, std::move(m)}; }

  // "probe:<id>" or "method:<module>/<name>". Throws Error(BadRequest).
  static Target parse(const std::string& text);
  std::string to_string() const;
};

// "<module>/<name>", splitting at the last '/'. Throws Error(BadRequest).
lang::MethodId parse_method(const std::string& text);

struct ProcedureCount {
  lang::MethodId method;
  std::size_t invocations = 0;
};

// Invoked methods in order of first invocation.
std::vector<ProcedureCount> procedure_set(const CallTree& tree);

struct AnnotationCount {
  std::string probe_id;
  std::size_t hits = 0;
};

// Every catalogued probe (0 for uncovered ones), then any other probe that
// appears in the tree.
std::vector<AnnotationCount> annotation_set(const CallTree& tree, const ProbeCatalog& probes);

struct DetailedPath {
  // Root down to the occurrence's frame: the enclosing frame of a probe hit,
  // or the invocation itself for a method target.
  std::vector<const TreeNode*> frames;
  const TreeNode* terminal = nullptr;
};

// One path per occurrence, in seq order.
std::vector<DetailedPath> detailed_paths(const CallTree& tree, const Target& target);

struct SummarizedPath {
  std::vector<lang::MethodId> methods;
  std::size_t hit_count = 0;
  std::vector<Seq> member_seqs;
  std::size_t color_index = 0;
};

struct PathSummary {
  std::vector<SummarizedPath> paths; // by first-occurrence seq
  std::size_t common_ancestor_depth = 0;
  FrameId context_sensitive_ancestor = trace::kRootFrame;
  std::size_t total_occurrences = 0;
};

// Groups occurrences by their method-level stack. A target without
// occurrences yields no paths, depth 0 and the root frame as ancestor.
PathSummary summarize_paths(const CallTree& tree, const Target& target);

enum class Direction { Next, Prev };

// Invocation of `method` with the nearest enter seq strictly after (Next) or
// before (Prev) `from_seq`.
const TreeNode* find_invocation(const CallTree& tree, Seq from_seq, const lang::MethodId& method,
                                Direction direction);
const TreeNode* first_invocation(const CallTree& tree, const lang::MethodId& method);

// The `ordinal`-th hit (0-based, seq order). Throws Error(OrdinalOutOfRange).
const TreeNode& locate_hit(const CallTree& tree, const std::string& probe_id, std::size_t ordinal);

struct Visibility {
  bool matching = false;
  bool visible = false;
};

// Indexed by node index. Case-insensitive substring match on the node label
// (plus the source excerpt for probe hits); a node is visible when it or a
// descendant matches.
std::vector<Visibility> filter_visibility(const CallTree& tree, const std::string& query,
                                          const ProbeCatalog* probes = nullptr);

// Methods of every invocation below `node`.
std::set<lang::MethodId> callees_recursive(const CallTree& tree, const TreeNode& node);

struct Succession {
  const TreeNode* prev = nullptr;
  const TreeNode* next = nullptr;
};

// Nearest hits on either side among probes whose enclosing method equals that
// of `hit`'s probe.
Succession value_succession(const CallTree& tree, const TreeNode& hit, const ProbeCatalog& probes);

struct ProbeValue {
  trace::Snapshot value;
  Seq seq = 0;
  std::size_t path_color_index = 0;
};

std::vector<ProbeValue> probe_values(const CallTree& tree, const std::string& probe_id, const PathSummary& summary);

struct LogEntry {
  std::string probe_id;
  Seq seq = 0;
  trace::Snapshot value;
};

// All probe hits interleaved in recording order.
std::vector<LogEntry> probe_log(const CallTree& tree);

} // namespace crosscut::analysis
