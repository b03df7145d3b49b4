#pragma once

#include "crosscut/trace/trace.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace crosscut::analysis {

using trace::FrameId;
using trace::Seq;

enum class NodeType { Root, Invocation, ProbeHit };

struct TreeNode {
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  NodeType type = NodeType::Invocation;
  std::size_t index = 0;
  std::size_t parent = kNone;
  int depth = 0; // root is 0
  std::vector<std::size_t> children;

  // Root and Invocation.
  FrameId frame = trace::kNoFrame;
  lang::MethodRef method;
  Seq enter_seq = 0;
  Seq exit_seq = 0;
  trace::ExitKind exit_kind = trace::ExitKind::Normal;
  std::vector<trace::Snapshot> args;
  trace::Snapshot result;
  lang::NodeId call_site = -1;

  // ProbeHit.
  std::shared_ptr<const std::string> probe_id;
  trace::Snapshot value;

  bool is_hit() const { return type == NodeType::ProbeHit; }
  bool is_invocation() const { return type == NodeType::Invocation; }
  // Identity used by navigation and the API: enter seq for frames, the hit
  // seq for probe hits.
  Seq seq() const { return enter_seq; }
};

// Dynamic invocation tree of one run. Nodes are stored in seq (pre-)order,
// so node index order equals seq order. Immutable once built.
class CallTree {
public:
  const std::string& example_id() const { return example_id_; }
  const std::string& run_id() const { return run_id_; }

  const TreeNode& root() const { return nodes_.front(); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t index) const { return nodes_.at(index); }
  std::size_t size() const { return nodes_.size(); }

  const TreeNode* by_frame(FrameId frame) const;
  const TreeNode* by_seq(Seq seq) const;

  // Node indices in seq order.
  const std::vector<std::size_t>& invocations_of(const lang::MethodId& method) const;
  const std::vector<std::size_t>& hits_of(const std::string& probe_id) const;
  const std::vector<std::size_t>& all_hits() const { return hits_; }
  // Methods in order of their first invocation.
  const std::vector<lang::MethodId>& methods() const { return method_order_; }
  // Probe ids in order of their first hit.
  const std::vector<std::string>& probes() const { return probe_order_; }

  // Innermost frame node containing the node (itself for frames).
  const TreeNode& frame_of(const TreeNode& node) const;
  // Frames from the root down to `frame`, inclusive.
  std::vector<const TreeNode*> ancestry(const TreeNode& frame) const;

  // Label shown for a node: example id for the root, "module.name" for
  // invocations, the probe id for hits.
  std::string label(const TreeNode& node) const;

private:
  friend CallTree build_call_tree(const trace::Trace& trace);

  std::string example_id_;
  std::string run_id_;
  std::vector<TreeNode> nodes_;
  std::unordered_map<FrameId, std::size_t> by_frame_;
  std::unordered_map<Seq, std::size_t> by_seq_;
  std::map<lang::MethodId, std::vector<std::size_t>> invocations_;
  std::map<std::string, std::vector<std::size_t>> hits_by_probe_;
  std::vector<std::size_t> hits_;
  std::vector<lang::MethodId> method_order_;
  std::vector<std::string> probe_order_;
};

// Single pass over the events with a frame stack. Throws
// Error(MalformedTrace) if bracketing is violated. A trace without events
// (failed setup) yields a bare root.
CallTree build_call_tree(const trace::Trace& trace);

// Root label of a run of `example_id` ("module#name" -> {module, "#name"}).
lang::MethodId root_method_for(const std::string& example_id);

} // namespace crosscut::analysis
