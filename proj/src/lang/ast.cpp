#include "crosscut/lang/ast.hpp"

#include "crosscut/lang/source.hpp"

namespace crosscut::lang {

std::string to_string(const SourceSpan& span) {
  return span.module_path + ":" + std::to_string(span.start_line) + ":" + std::to_string(span.start_col) +
         "-" + std::to_string(span.end_line) + ":" + std::to_string(span.end_col);
}

std::string_view node_kind_name(NodeKind kind) {
  switch (kind) {
  case NodeKind::Module: return "module";
  case NodeKind::Import: return "import";
  case NodeKind::FunctionDecl: return "function-decl";
  case NodeKind::ParamList: return "param-list";
  case NodeKind::Block: return "block";
  case NodeKind::Let: return "let";
  case NodeKind::Assign: return "assign";
  case NodeKind::If: return "if";
  case NodeKind::While: return "while";
  case NodeKind::Return: return "return";
  case NodeKind::Throw: return "throw";
  case NodeKind::TryCatch: return "try-catch";
  case NodeKind::Call: return "call";
  case NodeKind::Lambda: return "lambda";
  case NodeKind::BinaryOp: return "binary-op";
  case NodeKind::UnaryOp: return "unary-op";
  case NodeKind::Literal: return "literal";
  case NodeKind::Identifier: return "identifier";
  case NodeKind::ListLiteral: return "list-literal";
  case NodeKind::RecordLiteral: return "record-literal";
  case NodeKind::Index: return "index";
  case NodeKind::FieldAccess: return "field-access";
  case NodeKind::ProbeWrapper: return "probe-wrapper";
  case NodeKind::ExampleDecl: return "example-decl";
  }
  return "?";
}

std::string_view operator_text(Operator op) {
  switch (op) {
  case Operator::None: return "";
  case Operator::Or: return "||";
  case Operator::And: return "&&";
  case Operator::Equal: return "==";
  case Operator::NotEqual: return "!=";
  case Operator::Less: return "<";
  case Operator::LessEqual: return "<=";
  case Operator::Greater: return ">";
  case Operator::GreaterEqual: return ">=";
  case Operator::Add: return "+";
  case Operator::Subtract: return "-";
  case Operator::Multiply: return "*";
  case Operator::Divide: return "/";
  case Operator::Modulo: return "%";
  case Operator::Not: return "!";
  case Operator::Negate: return "-";
  }
  return "";
}

void walk(const AstNode& root, const std::function<bool(const AstNode&)>& visit) {
  std::vector<const AstNode*> stack{&root};
  while (!stack.empty()) {
    const AstNode* node = stack.back();
    stack.pop_back();
    if (!visit(*node)) {
      continue;
    }
    for (auto it = node->children.rbegin(); it != node->children.rend(); ++it) {
      stack.push_back(it->get());
    }
  }
}

std::size_t count_nodes(const AstNode& root) {
  std::size_t n = 0;
  walk(root, [&](const AstNode&) {
    ++n;
    return true;
  });
  return n;
}

} // namespace crosscut::lang
