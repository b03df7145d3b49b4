#include "crosscut/analysis/queries.hpp"

#include "crosscut/error.hpp"

#include <algorithm>
#include <cctype>

namespace crosscut::analysis {

// --- catalog and targets -----------------------------------------------------

ProbeCatalog ProbeCatalog::from_annotations(const std::vector<annotations::Probe>& probes) {
  ProbeCatalog catalog;
  for (const auto& probe : probes) {
    catalog.add(probe.probe_id, ProbeInfo{probe.enclosing_method, probe.source_excerpt});
  }
  return catalog;
}

ProbeCatalog ProbeCatalog::derive(const CallTree& tree) {
  ProbeCatalog catalog;
  for (const auto& id : tree.probes()) {
    const TreeNode& first = tree.node(tree.hits_of(id).front());
    catalog.add(id, ProbeInfo{*tree.frame_of(tree.node(first.parent)).method, {}});
  }
  return catalog;
}

const ProbeInfo* ProbeCatalog::find(const std::string& probe_id) const {
  auto it = info_.find(probe_id);
  return it == info_.end() ? nullptr : &it->second;
}

void ProbeCatalog::add(const std::string& probe_id, ProbeInfo info) {
  if (info_.emplace(probe_id, std::move(info)).second) {
    order_.push_back(probe_id);
  }
}

lang::MethodId parse_method(const std::string& text) {
  const auto slash = text.rfind('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == text.size()) {
    throw Error(ErrorCode::BadRequest, "method must be written as <module>/<name>, got '" + text + "'");
  }
  return {text.substr(0, slash), text.substr(slash + 1)};
}

Target Target::parse(const std::string& text) {
  constexpr std::string_view kProbe = "probe:";
  constexpr std::string_view kMethod = "method:";
  if (text.rfind(kProbe, 0) == 0 && text.size() > kProbe.size()) {
    return probe(text.substr(kProbe.size()));
  }
  if (text.rfind(kMethod, 0) == 0) {
    return of_method(parse_method(text.substr(kMethod.size())));
  }
  throw Error(ErrorCode::BadRequest, "target must be probe:<id> or method:<module>/<name>, got '" + text + "'");
}

std::string Target::to_string() const {
  return kind == Kind::Probe ? "probe:" + probe_id : "method:" + method.module_path + "/" + method.function_name;
}

// --- sets --------------------------------------------------------------------

std::vector<ProcedureCount> procedure_set(const CallTree& tree) {
  std::vector<ProcedureCount> out;
  for (const auto& method : tree.methods()) {
    out.push_back({method, tree.invocations_of(method).size()});
  }
  return out;
}

std::vector<AnnotationCount> annotation_set(const CallTree& tree, const ProbeCatalog& probes) {
  std::vector<AnnotationCount> out;
  for (const auto& id : probes.ids()) {
    out.push_back({id, tree.hits_of(id).size()});
  }
  for (const auto& id : tree.probes()) {
    if (probes.find(id) == nullptr) {
      out.push_back({id, tree.hits_of(id).size()});
    }
  }
  return out;
}

// --- paths -------------------------------------------------------------------

namespace {

const std::vector<std::size_t>& occurrences(const CallTree& tree, const Target& target) {
  return target.kind == Target::Kind::Probe ? tree.hits_of(target.probe_id) : tree.invocations_of(target.method);
}

const TreeNode& lowest_common_ancestor(const CallTree& tree, const TreeNode* a, const TreeNode* b) {
  while (a->depth > b->depth) {
    a = &tree.node(a->parent);
  }
  while (b->depth > a->depth) {
    b = &tree.node(b->parent);
  }
  while (a != b) {
    a = &tree.node(a->parent);
    b = &tree.node(b->parent);
  }
  return *a;
}

} // namespace

std::vector<DetailedPath> detailed_paths(const CallTree& tree, const Target& target) {
  std::vector<DetailedPath> out;
  for (std::size_t index : occurrences(tree, target)) {
    const TreeNode& node = tree.node(index);
    out.push_back(DetailedPath{tree.ancestry(tree.frame_of(node)), &node});
  }
  return out;
}

PathSummary summarize_paths(const CallTree& tree, const Target& target) {
  PathSummary summary;
  const auto& occ = occurrences(tree, target);
  summary.total_occurrences = occ.size();
  if (occ.empty()) {
    return summary;
  }

  std::map<std::vector<lang::MethodId>, std::size_t> group_of;
  const TreeNode* ancestor = nullptr;
  for (std::size_t index : occ) {
    const TreeNode& node = tree.node(index);
    const TreeNode& frame = tree.frame_of(node);
    std::vector<lang::MethodId> methods;
    methods.reserve(static_cast<std::size_t>(frame.depth) + 1);
    for (const TreeNode* f : tree.ancestry(frame)) {
      methods.push_back(*f->method);
    }
    auto [it, inserted] = group_of.emplace(methods, summary.paths.size());
    if (inserted) {
      SummarizedPath path;
      path.methods = std::move(methods);
      path.color_index = summary.paths.size();
      summary.paths.push_back(std::move(path));
    }
    SummarizedPath& path = summary.paths[it->second];
    ++path.hit_count;
    path.member_seqs.push_back(node.seq());
    ancestor = ancestor == nullptr ? &frame : &lowest_common_ancestor(tree, ancestor, &frame);
  }

  std::size_t prefix = summary.paths.front().methods.size();
  for (const auto& path : summary.paths) {
    const auto& first = summary.paths.front().methods;
    std::size_t i = 0;
    while (i < prefix && i < path.methods.size() && path.methods[i] == first[i]) {
      ++i;
    }
    prefix = i;
  }
  summary.common_ancestor_depth = prefix;
  summary.context_sensitive_ancestor = ancestor->frame;
  return summary;
}

// --- navigation --------------------------------------------------------------

const TreeNode* find_invocation(const CallTree& tree, Seq from_seq, const lang::MethodId& method,
                                Direction direction) {
  const auto& list = tree.invocations_of(method);
  auto by_seq = [&](std::size_t index, Seq seq) { return tree.node(index).seq() < seq; };
  if (direction == Direction::Next) {
    auto it = std::lower_bound(list.begin(), list.end(), from_seq + 1, by_seq);
    return it == list.end() ? nullptr : &tree.node(*it);
  }
  auto it = std::lower_bound(list.begin(), list.end(), from_seq, by_seq);
  return it == list.begin() ? nullptr : &tree.node(*std::prev(it));
}

const TreeNode* first_invocation(const CallTree& tree, const lang::MethodId& method) {
  const auto& list = tree.invocations_of(method);
  return list.empty() ? nullptr : &tree.node(list.front());
}

const TreeNode& locate_hit(const CallTree& tree, const std::string& probe_id, std::size_t ordinal) {
  const auto& hits = tree.hits_of(probe_id);
  if (ordinal >= hits.size()) {
    throw Error(ErrorCode::OrdinalOutOfRange, "probe '" + probe_id + "' has " + std::to_string(hits.size()) +
                                                  " hit(s); ordinal " + std::to_string(ordinal) +
                                                  " is out of range");
  }
  return tree.node(hits[ordinal]);
}

// --- filtering ---------------------------------------------------------------

namespace {

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

} // namespace

std::vector<Visibility> filter_visibility(const CallTree& tree, const std::string& query,
                                          const ProbeCatalog* probes) {
  const std::string needle = lower(query);
  std::vector<Visibility> out(tree.size());
  for (const auto& node : tree.nodes()) {
    bool match = lower(tree.label(node)).find(needle) != std::string::npos;
    if (!match && node.is_hit() && probes != nullptr) {
      if (const ProbeInfo* info = probes->find(*node.probe_id)) {
        match = lower(info->source_excerpt).find(needle) != std::string::npos;
      }
    }
    out[node.index].matching = match;
  }
  // Children always have larger indices than their parent.
  for (std::size_t i = tree.size(); i-- > 0;) {
    const TreeNode& node = tree.node(i);
    out[i].visible = out[i].visible || out[i].matching;
    if (out[i].visible && node.parent != TreeNode::kNone) {
      out[node.parent].visible = true;
    }
  }
  return out;
}

std::set<lang::MethodId> callees_recursive(const CallTree& tree, const TreeNode& node) {
  std::set<lang::MethodId> out;
  std::vector<std::size_t> stack(node.children.begin(), node.children.end());
  while (!stack.empty()) {
    const TreeNode& child = tree.node(stack.back());
    stack.pop_back();
    if (child.is_invocation()) {
      out.insert(*child.method);
    }
    stack.insert(stack.end(), child.children.begin(), child.children.end());
  }
  return out;
}

// --- probe values --------------------------------------------------------------

Succession value_succession(const CallTree& tree, const TreeNode& hit, const ProbeCatalog& probes) {
  Succession out;
  if (!hit.is_hit()) {
    return out;
  }
  const ProbeInfo* own = probes.find(*hit.probe_id);
  auto same_method = [&](const TreeNode& other) {
    if (*other.probe_id == *hit.probe_id) {
      return true;
    }
    const ProbeInfo* info = probes.find(*other.probe_id);
    return own != nullptr && info != nullptr && info->enclosing_method == own->enclosing_method;
  };
  const auto& hits = tree.all_hits();
  auto pos = std::lower_bound(hits.begin(), hits.end(), hit.index);
  for (auto it = pos; it != hits.begin();) {
    --it;
    if (same_method(tree.node(*it))) {
      out.prev = &tree.node(*it);
      break;
    }
  }
  for (auto it = pos == hits.end() ? pos : std::next(pos); it != hits.end(); ++it) {
    if (same_method(tree.node(*it))) {
      out.next = &tree.node(*it);
      break;
    }
  }
  return out;
}

std::vector<ProbeValue> probe_values(const CallTree& tree, const std::string& probe_id, const PathSummary& summary) {
  std::map<Seq, std::size_t> color_by_seq;
  for (const auto& path : summary.paths) {
    for (Seq seq : path.member_seqs) {
      color_by_seq[seq] = path.color_index;
    }
  }
  std::vector<ProbeValue> out;
  for (std::size_t index : tree.hits_of(probe_id)) {
    const TreeNode& node = tree.node(index);
    auto it = color_by_seq.find(node.seq());
    out.push_back({node.value, node.seq(), it == color_by_seq.end() ? 0 : it->second});
  }
  return out;
}

std::vector<LogEntry> probe_log(const CallTree& tree) {
  std::vector<LogEntry> out;
  out.reserve(tree.all_hits().size());
  for (std::size_t index : tree.all_hits()) {
    const TreeNode& node = tree.node(index);
    out.push_back({*node.probe_id, node.seq(), node.value});
  }
  return out;
}

} // namespace crosscut::analysis
