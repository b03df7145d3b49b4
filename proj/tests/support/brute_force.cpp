#include "brute_force.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace crosscut::testing {

namespace {

using nlohmann::json;

std::string label(const RefNode& n) {
  if (n.type == RefNode::Type::Root) return n.module + n.name; // "m.cc" + "#ex"
  if (n.type == RefNode::Type::Probe) return n.probe_id;
  return n.module + "." + n.name;
}

std::string method_label(const RefNode& n) { return n.module + "." + n.name; }

void occurrences(const RefNode& n, const RefTarget& t, std::vector<const RefNode*>& out) {
  const bool hit = t.probe ? (n.type == RefNode::Type::Probe && n.probe_id == t.id)
                           : (n.type == RefNode::Type::Call && method_label(n) == t.id);
  if (hit) out.push_back(&n);
  for (const auto& c : n.children) occurrences(*c, t, out);
}

// Frames from root to the occurrence's frame.
std::vector<const RefNode*> chain(const RefNode* n) {
  if (n->type == RefNode::Type::Probe) n = n->parent;
  std::vector<const RefNode*> out;
  for (; n; n = n->parent) out.insert(out.begin(), n);
  return out;
}

bool contains(const std::string& hay, const std::string& needle) {
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  return lower(hay).find(lower(needle)) != std::string::npos;
}

} // namespace

json brute_detailed_paths(const RefNode& root, const RefTarget& target) {
  std::vector<const RefNode*> occ;
  occurrences(root, target, occ);
  json out = json::array();
  for (const auto* o : occ) {
    json frames = json::array();
    for (const auto* f : chain(o)) frames.push_back(json::array({f->frame, method_label(*f)}));
    out.push_back({{"seq", o->enter_seq}, {"frames", frames}});
  }
  return out;
}

json brute_summary(const RefNode& root, const RefTarget& target) {
  std::vector<const RefNode*> occ;
  occurrences(root, target, occ);
  std::vector<std::vector<std::string>> keys;
  std::vector<std::vector<long>> members;
  for (const auto* o : occ) {
    std::vector<std::string> key;
    for (const auto* f : chain(o)) key.push_back(method_label(*f));
    std::size_t i = 0;
    while (i < keys.size() && keys[i] != key) ++i;
    if (i == keys.size()) {
      keys.push_back(key);
      members.emplace_back();
    }
    members[i].push_back(o->enter_seq);
  }

  // Longest common prefix, comparing element by element.
  std::size_t depth = 0;
  if (!keys.empty()) {
    for (;; ++depth) {
      bool same = depth < keys[0].size();
      for (const auto& k : keys) same = same && depth < k.size() && k[depth] == keys[0][depth];
      if (!same) break;
    }
  }

  // Lowest common ancestor by pairwise ancestor walks.
  long lca = 0;
  if (!occ.empty()) {
    const RefNode* acc = chain(occ[0]).back();
    for (const auto* o : occ) {
      const RefNode* other = chain(o).back();
      const RefNode* found = nullptr;
      for (const RefNode* a = acc; a && !found; a = a->parent) {
        for (const RefNode* b = other; b; b = b->parent) {
          if (a == b) {
            found = a;
            break;
          }
        }
      }
      acc = found;
    }
    lca = acc->frame;
  }

  json paths = json::array();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    paths.push_back({{"methods", keys[i]}, {"count", members[i].size()}, {"seqs", members[i]}, {"color", i}});
  }
  return {{"paths", paths}, {"depth", depth}, {"lca", lca}, {"total", occ.size()}};
}

json brute_filter(const RefNode& root, const std::string& query,
                  const std::function<std::string(const std::string&)>& excerpt) {
  std::function<bool(const RefNode&)> matches = [&](const RefNode& n) {
    if (contains(label(n), query)) return true;
    return n.type == RefNode::Type::Probe && contains(excerpt(n.probe_id), query);
  };
  std::function<bool(const RefNode&)> visible = [&](const RefNode& n) {
    if (matches(n)) return true;
    for (const auto& c : n.children) {
      if (visible(*c)) return true;
    }
    return false;
  };
  json out = json::object();
  std::function<void(const RefNode&)> visit = [&](const RefNode& n) {
    out[std::to_string(n.enter_seq)] = json::array({matches(n), visible(n)});
    for (const auto& c : n.children) visit(*c);
  };
  visit(root);
  return out;
}

json render_detailed_paths(const std::vector<analysis::DetailedPath>& paths) {
  json out = json::array();
  for (const auto& p : paths) {
    json frames = json::array();
    for (const auto* f : p.frames) frames.push_back(json::array({f->frame, f->method->qualified()}));
    out.push_back({{"seq", p.terminal->seq()}, {"frames", frames}});
  }
  return out;
}

json render_summary(const analysis::PathSummary& summary) {
  json paths = json::array();
  for (const auto& p : summary.paths) {
    std::vector<std::string> methods;
    for (const auto& m : p.methods) methods.push_back(m.qualified());
    paths.push_back({{"methods", methods}, {"count", p.hit_count}, {"seqs", p.member_seqs}, {"color", p.color_index}});
  }
  return {{"paths", paths},
          {"depth", summary.common_ancestor_depth},
          {"lca", summary.context_sensitive_ancestor},
          {"total", summary.total_occurrences}};
}

json render_filter(const analysis::CallTree& tree, const std::vector<analysis::Visibility>& visibility) {
  json out = json::object();
  for (const auto& n : tree.nodes()) {
    out[std::to_string(n.seq())] = json::array({visibility[n.index].matching, visibility[n.index].visible});
  }
  return out;
}

} // namespace crosscut::testing
