#include "crosscut/lang/parser.hpp"

#include "crosscut/lang/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <set>

namespace crosscut::lang {

namespace {

using NodePtr = std::unique_ptr<AstNode>;

class Parser {
public:
  Parser(std::vector<Token> tokens, const std::string& module)
      : tokens_(std::move(tokens)), module_(module) {}

  NodePtr parse_module() {
    auto root = make(NodeKind::Module, peek());
    while (check(TokenKind::Import)) {
      root->children.push_back(parse_import());
    }
    std::set<std::string> functions;
    std::set<std::string> examples;
    while (!check(TokenKind::EndOfFile)) {
      if (check(TokenKind::Fn)) {
        auto decl = parse_function_decl();
        if (!functions.insert(decl->name).second) {
          fail(decl->span, "duplicate function name '" + decl->name + "'");
        }
        root->children.push_back(std::move(decl));
      } else if (check(TokenKind::Example)) {
        auto decl = parse_example();
        if (!examples.insert(decl->name).second) {
          fail(decl->span, "duplicate example name '" + decl->name + "'");
        }
        root->children.push_back(std::move(decl));
      } else if (check(TokenKind::Import)) {
        fail(span_of(peek()), "imports must precede all declarations");
      } else {
        fail(span_of(peek()), "expected 'fn' or '#example' at top level, found " + describe(peek()));
      }
    }
    if (root->children.empty()) {
      root->span = span_of(peek());
    } else {
      root->span = join(root->children.front()->span, root->children.back()->span);
    }
    return root;
  }

private:
  // --- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  bool check(TokenKind kind) const { return peek().kind == kind; }
  const Token& previous() const { return tokens_[pos_ - 1]; }

  const Token& advance() {
    if (!check(TokenKind::EndOfFile)) {
      ++pos_;
    }
    return previous();
  }

  bool match(TokenKind kind) {
    if (check(kind)) {
      advance();
      return true;
    }
    return false;
  }

  const Token& expect(TokenKind kind, std::string_view context) {
    if (!check(kind)) {
      fail(span_of(peek()), "expected " + std::string(token_kind_name(kind)) + " " + std::string(context) +
                                ", found " + describe(peek()));
    }
    return advance();
  }

  static std::string describe(const Token& tok) {
    switch (tok.kind) {
    case TokenKind::Identifier: return "identifier '" + tok.text + "'";
    case TokenKind::Integer:
    case TokenKind::Float: return "number " + tok.text;
    case TokenKind::String: return "string literal";
    default: return std::string(token_kind_name(tok.kind));
    }
  }

  SourceSpan span_of(const Token& tok) const {
    return SourceSpan{module_, tok.line, tok.col, tok.end_line, tok.end_col};
  }

  static SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
    return SourceSpan{a.module_path, a.start_line, a.start_col, b.end_line, b.end_col};
  }

  SourceSpan from(const Token& first) const {
    const Token& last = previous();
    return SourceSpan{module_, first.line, first.col, last.end_line, last.end_col};
  }

  [[noreturn]] void fail(const SourceSpan& span, const std::string& message) const {
    throw ParseError(span, message);
  }

  NodePtr make(NodeKind kind, const Token& first) const {
    auto node = std::make_unique<AstNode>();
    node->kind = kind;
    node->span = span_of(first);
    return node;
  }

  // --- declarations --------------------------------------------------------

  NodePtr parse_import() {
    const Token& first = advance();
    auto node = make(NodeKind::Import, first);
    const Token& path = expect(TokenKind::String, "after 'import'");
    expect(TokenKind::Semicolon, "after import");
    node->text = path.text;
    node->name = std::filesystem::path(path.text).stem().string();
    if (node->name.empty() || !std::all_of(node->name.begin(), node->name.end(), [](char c) {
          return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
        }) || std::isdigit(static_cast<unsigned char>(node->name.front()))) {
      fail(span_of(path), "import path '" + path.text + "' does not name an identifier-like module");
    }
    node->symbol = intern(node->name);
    node->span = from(first);
    return node;
  }

  NodePtr parse_function_decl() {
    const Token& first = advance();
    auto node = make(NodeKind::FunctionDecl, first);
    const Token& name = expect(TokenKind::Identifier, "after 'fn'");
    node->name = name.text;
    node->symbol = intern(name.text);
    node->children.push_back(parse_params());
    node->children.push_back(parse_block());
    node->span = from(first);
    return node;
  }

  NodePtr parse_params() {
    const Token& first = expect(TokenKind::LParen, "to open parameter list");
    auto node = make(NodeKind::ParamList, first);
    std::set<std::string> seen;
    if (!check(TokenKind::RParen)) {
      do {
        const Token& param = expect(TokenKind::Identifier, "in parameter list");
        if (!seen.insert(param.text).second) {
          fail(span_of(param), "duplicate parameter '" + param.text + "'");
        }
        auto ident = make(NodeKind::Identifier, param);
        ident->name = param.text;
        ident->symbol = intern(param.text);
        node->children.push_back(std::move(ident));
      } while (match(TokenKind::Comma));
    }
    expect(TokenKind::RParen, "to close parameter list");
    node->span = from(first);
    return node;
  }

  NodePtr parse_example() {
    const Token& first = advance();
    auto node = make(NodeKind::ExampleDecl, first);
    const Token& name = expect(TokenKind::String, "after '#example'");
    if (name.text.empty()) {
      fail(span_of(name), "example name must not be empty");
    }
    node->name = name.text;
    if (check(TokenKind::Identifier) && peek().text == "setup" && peek(1).kind == TokenKind::LBrace) {
      advance();
      node->setup_index = static_cast<int>(node->children.size());
      node->children.push_back(parse_block());
    }
    node->body_index = static_cast<int>(node->children.size());
    node->children.push_back(parse_block());
    if (check(TokenKind::Identifier) && peek().text == "teardown" && peek(1).kind == TokenKind::LBrace) {
      advance();
      node->teardown_index = static_cast<int>(node->children.size());
      node->children.push_back(parse_block());
    }
    node->span = from(first);
    return node;
  }

  // --- statements ----------------------------------------------------------

  NodePtr parse_block() {
    const Token& first = expect(TokenKind::LBrace, "to open block");
    auto node = make(NodeKind::Block, first);
    while (!check(TokenKind::RBrace)) {
      if (check(TokenKind::EndOfFile)) {
        fail(span_of(first), "unbalanced '{': block is never closed");
      }
      node->children.push_back(parse_statement());
    }
    advance();
    node->span = from(first);
    return node;
  }

  NodePtr parse_statement() {
    const Token& first = peek();
    switch (first.kind) {
    case TokenKind::Example: fail(span_of(first), "example declarations are only allowed at top level");
    case TokenKind::Import: fail(span_of(first), "imports are only allowed at top level");
    case TokenKind::Let: {
      advance();
      auto node = make(NodeKind::Let, first);
      const Token& name = expect(TokenKind::Identifier, "after 'let'");
      node->name = name.text;
      node->symbol = intern(name.text);
      expect(TokenKind::Assign, "in let statement");
      node->children.push_back(parse_expression());
      expect(TokenKind::Semicolon, "after let statement");
      node->span = from(first);
      return node;
    }
    case TokenKind::If: {
      advance();
      auto node = make(NodeKind::If, first);
      node->children.push_back(parse_expression());
      node->children.push_back(parse_block());
      if (match(TokenKind::Else)) {
        node->children.push_back(parse_block());
      }
      node->span = from(first);
      return node;
    }
    case TokenKind::While: {
      advance();
      auto node = make(NodeKind::While, first);
      node->children.push_back(parse_expression());
      node->children.push_back(parse_block());
      node->span = from(first);
      return node;
    }
    case TokenKind::Return: {
      advance();
      auto node = make(NodeKind::Return, first);
      if (!check(TokenKind::Semicolon)) {
        node->children.push_back(parse_expression());
      }
      expect(TokenKind::Semicolon, "after return");
      node->span = from(first);
      return node;
    }
    case TokenKind::Throw: {
      advance();
      auto node = make(NodeKind::Throw, first);
      node->children.push_back(parse_expression());
      expect(TokenKind::Semicolon, "after throw");
      node->span = from(first);
      return node;
    }
    case TokenKind::Try: {
      advance();
      auto node = make(NodeKind::TryCatch, first);
      node->children.push_back(parse_block());
      expect(TokenKind::Catch, "after try block");
      expect(TokenKind::LParen, "after 'catch'");
      const Token& name = expect(TokenKind::Identifier, "in catch clause");
      node->name = name.text;
      node->symbol = intern(name.text);
      expect(TokenKind::RParen, "in catch clause");
      node->children.push_back(parse_block());
      node->span = from(first);
      return node;
    }
    default: break;
    }

    auto expr = parse_expression();
    if (match(TokenKind::Assign)) {
      if (expr->kind != NodeKind::Identifier && expr->kind != NodeKind::Index &&
          expr->kind != NodeKind::FieldAccess) {
        fail(expr->span, "invalid assignment target");
      }
      auto node = make(NodeKind::Assign, first);
      node->children.push_back(std::move(expr));
      node->children.push_back(parse_expression());
      expect(TokenKind::Semicolon, "after assignment");
      node->span = from(first);
      return node;
    }
    expect(TokenKind::Semicolon, "after expression");
    return expr;
  }

  // --- expressions ---------------------------------------------------------

  NodePtr parse_expression() { return parse_binary(0); }

  static int precedence(TokenKind kind) {
    switch (kind) {
    case TokenKind::OrOr: return 1;
    case TokenKind::AndAnd: return 2;
    case TokenKind::EqualEqual:
    case TokenKind::BangEqual: return 3;
    case TokenKind::Less:
    case TokenKind::LessEqual:
    case TokenKind::Greater:
    case TokenKind::GreaterEqual: return 4;
    case TokenKind::Plus:
    case TokenKind::Minus: return 5;
    case TokenKind::Star:
    case TokenKind::Slash:
    case TokenKind::Percent: return 6;
    default: return 0;
    }
  }

  static Operator binary_operator(TokenKind kind) {
    switch (kind) {
    case TokenKind::OrOr: return Operator::Or;
    case TokenKind::AndAnd: return Operator::And;
    case TokenKind::EqualEqual: return Operator::Equal;
    case TokenKind::BangEqual: return Operator::NotEqual;
    case TokenKind::Less: return Operator::Less;
    case TokenKind::LessEqual: return Operator::LessEqual;
    case TokenKind::Greater: return Operator::Greater;
    case TokenKind::GreaterEqual: return Operator::GreaterEqual;
    case TokenKind::Plus: return Operator::Add;
    case TokenKind::Minus: return Operator::Subtract;
    case TokenKind::Star: return Operator::Multiply;
    case TokenKind::Slash: return Operator::Divide;
    case TokenKind::Percent: return Operator::Modulo;
    default: return Operator::None;
    }
  }

  NodePtr parse_binary(int min_precedence) {
    auto lhs = parse_unary();
    for (;;) {
      const int prec = precedence(peek().kind);
      if (prec == 0 || prec <= min_precedence) {
        return lhs;
      }
      const Token& op = advance();
      auto rhs = parse_binary(prec);
      auto node = std::make_unique<AstNode>();
      node->kind = NodeKind::BinaryOp;
      node->op = binary_operator(op.kind);
      node->span = join(lhs->span, rhs->span);
      node->children.push_back(std::move(lhs));
      node->children.push_back(std::move(rhs));
      lhs = std::move(node);
    }
  }

  NodePtr parse_unary() {
    if (check(TokenKind::Bang) || check(TokenKind::Minus)) {
      const Token& first = advance();
      auto node = make(NodeKind::UnaryOp, first);
      node->op = first.kind == TokenKind::Bang ? Operator::Not : Operator::Negate;
      node->children.push_back(parse_unary());
      node->span = from(first);
      return node;
    }
    return parse_postfix();
  }

  NodePtr parse_postfix() {
    const Token& first = peek();
    auto expr = parse_primary();
    for (;;) {
      if (match(TokenKind::LParen)) {
        auto call = make(NodeKind::Call, first);
        call->children.push_back(std::move(expr));
        if (!check(TokenKind::RParen)) {
          do {
            call->children.push_back(parse_expression());
          } while (match(TokenKind::Comma));
        }
        expect(TokenKind::RParen, "to close argument list");
        call->span = from(first);
        expr = std::move(call);
      } else if (match(TokenKind::LBracket)) {
        auto index = make(NodeKind::Index, first);
        index->children.push_back(std::move(expr));
        index->children.push_back(parse_expression());
        expect(TokenKind::RBracket, "to close index");
        index->span = from(first);
        expr = std::move(index);
      } else if (match(TokenKind::Dot)) {
        auto field = make(NodeKind::FieldAccess, first);
        const Token& name = expect(TokenKind::Identifier, "after '.'");
        field->name = name.text;
        field->children.push_back(std::move(expr));
        field->span = from(first);
        expr = std::move(field);
      } else {
        return expr;
      }
    }
  }

  NodePtr parse_primary() {
    const Token& first = peek();
    switch (first.kind) {
    case TokenKind::Integer: {
      advance();
      auto node = make(NodeKind::Literal, first);
      std::int64_t value = 0;
      const auto [ptr, ec] = std::from_chars(first.text.data(), first.text.data() + first.text.size(), value);
      if (ec != std::errc{} || ptr != first.text.data() + first.text.size()) {
        fail(span_of(first), "integer literal out of range");
      }
      node->literal = value;
      return node;
    }
    case TokenKind::Float: {
      advance();
      auto node = make(NodeKind::Literal, first);
      node->literal = std::stod(first.text);
      return node;
    }
    case TokenKind::String: {
      advance();
      auto node = make(NodeKind::Literal, first);
      node->literal = first.text;
      return node;
    }
    case TokenKind::True:
    case TokenKind::False: {
      advance();
      auto node = make(NodeKind::Literal, first);
      node->literal = first.kind == TokenKind::True;
      return node;
    }
    case TokenKind::Nil: {
      advance();
      auto node = make(NodeKind::Literal, first);
      node->literal = NilLiteral{};
      return node;
    }
    case TokenKind::Identifier: {
      advance();
      auto node = make(NodeKind::Identifier, first);
      node->name = first.text;
      node->symbol = intern(first.text);
      return node;
    }
    case TokenKind::LParen: {
      advance();
      auto inner = parse_expression();
      expect(TokenKind::RParen, "to close parenthesized expression");
      return inner;
    }
    case TokenKind::LBracket: {
      advance();
      auto node = make(NodeKind::ListLiteral, first);
      if (!check(TokenKind::RBracket)) {
        do {
          node->children.push_back(parse_expression());
        } while (match(TokenKind::Comma));
      }
      expect(TokenKind::RBracket, "to close list literal");
      node->span = from(first);
      return node;
    }
    case TokenKind::LBrace: {
      advance();
      auto node = make(NodeKind::RecordLiteral, first);
      std::set<std::string> seen;
      if (!check(TokenKind::RBrace)) {
        do {
          const Token& key = expect(TokenKind::Identifier, "as record field name");
          if (!seen.insert(key.text).second) {
            fail(span_of(key), "duplicate record field '" + key.text + "'");
          }
          expect(TokenKind::Colon, "after record field name");
          node->keys.push_back(key.text);
          node->children.push_back(parse_expression());
        } while (match(TokenKind::Comma));
      }
      expect(TokenKind::RBrace, "to close record literal");
      node->span = from(first);
      return node;
    }
    case TokenKind::ProbeOpen: {
      advance();
      auto node = make(NodeKind::ProbeWrapper, first);
      if (check(TokenKind::RBrace)) {
        fail(span_of(first), "probe must wrap an expression");
      }
      node->children.push_back(parse_expression());
      if (!check(TokenKind::RBrace)) {
        fail(span_of(first), "unbalanced '@{': expected '}' to close probe, found " + describe(peek()));
      }
      advance();
      node->span = from(first);
      return node;
    }
    case TokenKind::Fn: {
      advance();
      auto node = make(NodeKind::Lambda, first);
      node->children.push_back(parse_params());
      node->children.push_back(parse_block());
      node->span = from(first);
      return node;
    }
    case TokenKind::Example: fail(span_of(first), "example declarations are only allowed at top level");
    default: fail(span_of(first), "expected expression, found " + describe(first));
    }
  }

  std::vector<Token> tokens_;
  const std::string& module_;
  std::size_t pos_ = 0;
};

void assign_ids(AstNode& root, NodeId first_id) {
  NodeId next = first_id;
  std::vector<AstNode*> stack{&root};
  while (!stack.empty()) {
    AstNode* node = stack.back();
    stack.pop_back();
    node->id = next++;
    for (auto it = node->children.rbegin(); it != node->children.rend(); ++it) {
      stack.push_back(it->get());
    }
  }
}

} // namespace

std::unique_ptr<AstNode> parse(std::string_view source_text, const std::string& module_path, NodeId first_id) {
  Parser parser(tokenize(source_text, module_path), module_path);
  auto root = parser.parse_module();
  assign_ids(*root, first_id);
  return root;
}

} // namespace crosscut::lang
