#pragma once

#include "crosscut/lang/source.hpp"
#include "crosscut/lang/symbol.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace crosscut::lang {

using NodeId = std::int64_t;

enum class NodeKind {
  Module,
  Import,
  FunctionDecl,
  ParamList,
  Block,
  Let,
  Assign,
  If,
  While,
  Return,
  Throw,
  TryCatch,
  Call,
  Lambda,
  BinaryOp,
  UnaryOp,
  Literal,
  Identifier,
  ListLiteral,
  RecordLiteral,
  Index,
  FieldAccess,
  ProbeWrapper,
  ExampleDecl,
};

std::string_view node_kind_name(NodeKind kind);

enum class Operator {
  None,
  Or,
  And,
  Equal,
  NotEqual,
  Less,
  LessEqual,
  Greater,
  GreaterEqual,
  Add,
  Subtract,
  Multiply,
  Divide,
  Modulo,
  Not,
  Negate,
};

std::string_view operator_text(Operator op);

struct NilLiteral {
  bool operator==(const NilLiteral&) const = default;
};
using LiteralValue = std::variant<NilLiteral, bool, std::int64_t, double, std::string>;

// Child layout per kind:
//   Module        imports..., declarations...
//   FunctionDecl  [ParamList, Block]            name = function name
//   Lambda        [ParamList, Block]
//   ParamList     Identifier...
//   Let           [value]                       name = variable
//   Assign        [target, value]               target: Identifier | Index | FieldAccess
//   If            [cond, then, else?]
//   While         [cond, body]
//   Return        [value?]
//   Throw         [value]
//   TryCatch      [try, catch]                  name = caught variable
//   Call          [callee, args...]
//   BinaryOp      [lhs, rhs]                    op
//   UnaryOp       [operand]                     op
//   ListLiteral   elements...
//   RecordLiteral values...                     keys (parallel to children)
//   Index         [object, index]
//   FieldAccess   [object]                      name = field
//   ProbeWrapper  [expr]
//   ExampleDecl   [setup?, body, teardown?]     name = example name; see setup/body/teardown
//   Import        []                            name = binding, text = module path
struct AstNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Block;
  SourceSpan span;
  std::vector<std::unique_ptr<AstNode>> children;

  std::string name;
  Symbol symbol = 0;
  std::string text;
  Operator op = Operator::None;
  LiteralValue literal;
  std::vector<std::string> keys;

  // ExampleDecl child indices; -1 when absent.
  int setup_index = -1;
  int body_index = -1;
  int teardown_index = -1;

  const AstNode& child(std::size_t i) const { return *children.at(i); }
  std::size_t size() const { return children.size(); }

  const AstNode* example_setup() const { return setup_index < 0 ? nullptr : children[setup_index].get(); }
  const AstNode* example_body() const { return body_index < 0 ? nullptr : children[body_index].get(); }
  const AstNode* example_teardown() const {
    return teardown_index < 0 ? nullptr : children[teardown_index].get();
  }
};

// Pre-order traversal; the visitor returns false to skip a subtree.
void walk(const AstNode& root, const std::function<bool(const AstNode&)>& visit);

// Number of nodes in the subtree rooted at `root`.
std::size_t count_nodes(const AstNode& root);

} // namespace crosscut::lang
