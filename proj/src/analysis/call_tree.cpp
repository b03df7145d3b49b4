#include "crosscut/analysis/call_tree.hpp"

#include "crosscut/error.hpp"

namespace crosscut::analysis {

lang::MethodId root_method_for(const std::string& example_id) {
  const auto hash = example_id.rfind('#');
  if (hash == std::string::npos) {
    return {"", "#" + example_id};
  }
  return {example_id.substr(0, hash), example_id.substr(hash)};
}

const TreeNode* CallTree::by_frame(FrameId frame) const {
  auto it = by_frame_.find(frame);
  return it == by_frame_.end() ? nullptr : &nodes_[it->second];
}

const TreeNode* CallTree::by_seq(Seq seq) const {
  auto it = by_seq_.find(seq);
  return it == by_seq_.end() ? nullptr : &nodes_[it->second];
}

const std::vector<std::size_t>& CallTree::invocations_of(const lang::MethodId& method) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = invocations_.find(method);
  return it == invocations_.end() ? kEmpty : it->second;
}

const std::vector<std::size_t>& CallTree::hits_of(const std::string& probe_id) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = hits_by_probe_.find(probe_id);
  return it == hits_by_probe_.end() ? kEmpty : it->second;
}

const TreeNode& CallTree::frame_of(const TreeNode& node) const {
  return node.is_hit() ? nodes_[node.parent] : node;
}

std::vector<const TreeNode*> CallTree::ancestry(const TreeNode& frame) const {
  std::vector<const TreeNode*> chain(static_cast<std::size_t>(frame.depth) + 1);
  const TreeNode* cur = &frame;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    *it = cur;
    cur = cur->parent == TreeNode::kNone ? nullptr : &nodes_[cur->parent];
  }
  return chain;
}

std::string CallTree::label(const TreeNode& node) const {
  switch (node.type) {
  case NodeType::Root: return example_id_;
  case NodeType::Invocation: return node.method->qualified();
  case NodeType::ProbeHit: return *node.probe_id;
  }
  return {};
}

CallTree build_call_tree(const trace::Trace& trace) {
  trace::validate_bracketing(trace);

  CallTree tree;
  tree.example_id_ = trace.example_id;
  tree.run_id_ = trace.run_id;
  tree.nodes_.reserve(trace.events.size() / 2 + 1);

  if (trace.events.empty()) {
    TreeNode root;
    root.type = NodeType::Root;
    root.frame = trace::kRootFrame;
    root.method = std::make_shared<const lang::MethodId>(root_method_for(trace.example_id));
    tree.nodes_.push_back(std::move(root));
    tree.by_frame_.emplace(trace::kRootFrame, 0);
    return tree;
  }

  std::vector<std::size_t> stack;
  for (const auto& event : trace.events) {
    if (const auto* enter = event.enter()) {
      TreeNode node;
      node.index = tree.nodes_.size();
      node.type = stack.empty() ? NodeType::Root : NodeType::Invocation;
      node.parent = stack.empty() ? TreeNode::kNone : stack.back();
      node.depth = stack.empty() ? 0 : tree.nodes_[stack.back()].depth + 1;
      node.frame = enter->frame;
      node.method = enter->method;
      node.enter_seq = event.seq;
      node.args = enter->args;
      node.call_site = enter->site;
      if (!stack.empty()) {
        tree.nodes_[stack.back()].children.push_back(node.index);
        auto& list = tree.invocations_[*node.method];
        if (list.empty()) {
          tree.method_order_.push_back(*node.method);
        }
        list.push_back(node.index);
      }
      tree.by_frame_.emplace(node.frame, node.index);
      tree.by_seq_.emplace(node.enter_seq, node.index);
      stack.push_back(node.index);
      tree.nodes_.push_back(std::move(node));
    } else if (const auto* exit = event.exit()) {
      TreeNode& node = tree.nodes_[stack.back()];
      node.exit_seq = event.seq;
      node.exit_kind = exit->kind;
      node.result = exit->result;
      stack.pop_back();
    } else if (const auto* hit = event.probe()) {
      const std::size_t frame_index = tree.by_frame_.at(hit->frame);
      TreeNode node;
      node.index = tree.nodes_.size();
      node.type = NodeType::ProbeHit;
      node.parent = frame_index;
      node.depth = tree.nodes_[frame_index].depth + 1;
      node.frame = hit->frame;
      node.probe_id = hit->probe_id;
      node.value = hit->value;
      node.enter_seq = event.seq;
      node.exit_seq = event.seq;
      tree.nodes_[frame_index].children.push_back(node.index);
      auto& list = tree.hits_by_probe_[*hit->probe_id];
      if (list.empty()) {
        tree.probe_order_.push_back(*hit->probe_id);
      }
      list.push_back(node.index);
      tree.hits_.push_back(node.index);
      tree.by_seq_.emplace(node.enter_seq, node.index);
      tree.nodes_.push_back(std::move(node));
    }
  }
  return tree;
}

} // namespace crosscut::analysis
