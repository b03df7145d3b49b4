#include "crosscut/lang/program.hpp"

#include "crosscut/lang/parser.hpp"

#include <stdexcept>

namespace crosscut::lang {

std::string lambda_name(const SourceSpan& span) {
  return "<lambda>@" + std::to_string(span.start_line) + ":" + std::to_string(span.start_col);
}

std::shared_ptr<const SourceProgram> SourceProgram::parse(std::vector<ModuleSource> sources) {
  std::vector<Module> modules;
  NodeId next_id = 0;
  for (auto& source : sources) {
    Module module;
    module.path = std::move(source.path);
    module.text = std::move(source.text);
    module.root = lang::parse(module.text, module.path, next_id);
    next_id += static_cast<NodeId>(count_nodes(*module.root));
    modules.push_back(std::move(module));
  }
  return std::make_shared<const SourceProgram>(std::move(modules));
}

SourceProgram::SourceProgram(std::vector<Module> modules) : modules_(std::move(modules)) {
  NodeId max_id = -1;
  for (const auto& module : modules_) {
    walk(*module.root, [&](const AstNode& n) {
      max_id = std::max(max_id, n.id);
      return true;
    });
  }
  nodes_.assign(static_cast<std::size_t>(max_id + 1), nullptr);
  methods_by_node_.resize(nodes_.size());
  module_by_node_.assign(nodes_.size(), -1);

  for (std::size_t i = 0; i < modules_.size(); ++i) {
    Module& module = modules_[i];
    module.index = static_cast<int>(i);
    module.functions.clear();
    walk(*module.root, [&](const AstNode& n) {
      auto& slot = nodes_[static_cast<std::size_t>(n.id)];
      if (slot != nullptr) {
        throw std::invalid_argument("duplicate node id " + std::to_string(n.id));
      }
      slot = &n;
      module_by_node_[static_cast<std::size_t>(n.id)] = static_cast<int>(i);
      if (n.kind == NodeKind::FunctionDecl) {
        auto id = std::make_shared<const MethodId>(MethodId{module.path, n.name});
        methods_by_node_[static_cast<std::size_t>(n.id)] = id;
        functions_.emplace(*id, &n);
        module.functions.push_back(&n);
      } else if (n.kind == NodeKind::Lambda) {
        methods_by_node_[static_cast<std::size_t>(n.id)] =
            std::make_shared<const MethodId>(MethodId{module.path, lambda_name(n.span)});
      }
      return true;
    });
  }
}

const Module* SourceProgram::find_module(std::string_view path) const {
  for (const auto& module : modules_) {
    if (module.path == path) {
      return &module;
    }
  }
  return nullptr;
}

const AstNode* SourceProgram::find_function(const MethodId& id) const {
  auto it = functions_.find(id);
  return it == functions_.end() ? nullptr : it->second;
}

const MethodRef& SourceProgram::method_of(const AstNode& decl) const {
  static const MethodRef kNone;
  const auto index = static_cast<std::size_t>(decl.id);
  if (index >= methods_by_node_.size() || nodes_[index] != &decl) {
    return kNone;
  }
  return methods_by_node_[index];
}

const AstNode* SourceProgram::node(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    return nullptr;
  }
  return nodes_[static_cast<std::size_t>(id)];
}

const Module* SourceProgram::module_of(const AstNode& node) const {
  const auto index = static_cast<std::size_t>(node.id);
  if (index >= module_by_node_.size() || module_by_node_[index] < 0) {
    return nullptr;
  }
  return &modules_[static_cast<std::size_t>(module_by_node_[index])];
}

} // namespace crosscut::lang
