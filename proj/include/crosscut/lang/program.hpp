#pragma once

#include "crosscut/lang/ast.hpp"
#include "crosscut/lang/source.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace crosscut::lang {

struct ModuleSource {
  std::string path;
  std::string text;
};

struct Module {
  std::string path;
  std::string text;
  int index = 0;
  std::unique_ptr<AstNode> root;
  // Declared functions in source order.
  std::vector<const AstNode*> functions;
};

// Parsed modules plus lookup tables. Immutable after construction.
class SourceProgram {
public:
  // Parses every module in order; node ids stay unique across modules.
  // Throws ParseError on the first failing module.
  static std::shared_ptr<const SourceProgram> parse(std::vector<ModuleSource> sources);

  // Assembles already-parsed modules. Node ids must not collide.
  explicit SourceProgram(std::vector<Module> modules);

  SourceProgram(const SourceProgram&) = delete;
  SourceProgram& operator=(const SourceProgram&) = delete;

  const std::vector<Module>& modules() const { return modules_; }
  const Module* find_module(std::string_view path) const;

  const AstNode* find_function(const MethodId& id) const;
  const std::map<MethodId, const AstNode*>& functions() const { return functions_; }

  // Identity of a function-decl or lambda node; null for other nodes.
  const MethodRef& method_of(const AstNode& decl) const;

  const AstNode* node(NodeId id) const;
  NodeId node_count() const { return static_cast<NodeId>(nodes_.size()); }

  // Module that declares the node, or null.
  const Module* module_of(const AstNode& node) const;

private:
  std::vector<Module> modules_;
  std::map<MethodId, const AstNode*> functions_;
  std::vector<const AstNode*> nodes_;
  std::vector<MethodRef> methods_by_node_;
  std::vector<int> module_by_node_;
};

// Name for a lambda defined at `span`: "<lambda>@line:col".
std::string lambda_name(const SourceSpan& span);

} // namespace crosscut::lang
