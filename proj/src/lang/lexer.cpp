#include "crosscut/lang/lexer.hpp"

#include "crosscut/lang/parser.hpp"

#include <cctype>
#include <unordered_map>

namespace crosscut::lang {

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
  case TokenKind::Identifier: return "identifier";
  case TokenKind::Integer: return "integer";
  case TokenKind::Float: return "float";
  case TokenKind::String: return "string";
  case TokenKind::Fn: return "'fn'";
  case TokenKind::Let: return "'let'";
  case TokenKind::If: return "'if'";
  case TokenKind::Else: return "'else'";
  case TokenKind::While: return "'while'";
  case TokenKind::Return: return "'return'";
  case TokenKind::Throw: return "'throw'";
  case TokenKind::Try: return "'try'";
  case TokenKind::Catch: return "'catch'";
  case TokenKind::True: return "'true'";
  case TokenKind::False: return "'false'";
  case TokenKind::Nil: return "'nil'";
  case TokenKind::Import: return "'import'";
  case TokenKind::Example: return "'#example'";
  case TokenKind::ProbeOpen: return "'@{'";
  case TokenKind::LParen: return "'('";
  case TokenKind::RParen: return "')'";
  case TokenKind::LBrace: return "'{'";
  case TokenKind::RBrace: return "'}'";
  case TokenKind::LBracket: return "'['";
  case TokenKind::RBracket: return "']'";
  case TokenKind::Comma: return "','";
  case TokenKind::Semicolon: return "';'";
  case TokenKind::Colon: return "':'";
  case TokenKind::Dot: return "'.'";
  case TokenKind::Assign: return "'='";
  case TokenKind::EqualEqual: return "'=='";
  case TokenKind::BangEqual: return "'!='";
  case TokenKind::Less: return "'<'";
  case TokenKind::LessEqual: return "'<='";
  case TokenKind::Greater: return "'>'";
  case TokenKind::GreaterEqual: return "'>='";
  case TokenKind::Plus: return "'+'";
  case TokenKind::Minus: return "'-'";
  case TokenKind::Star: return "'*'";
  case TokenKind::Slash: return "'/'";
  case TokenKind::Percent: return "'%'";
  case TokenKind::Bang: return "'!'";
  case TokenKind::AndAnd: return "'&&'";
  case TokenKind::OrOr: return "'||'";
  case TokenKind::EndOfFile: return "end of file";
  }
  return "?";
}

namespace {

const std::unordered_map<std::string_view, TokenKind>& keywords() {
  static const std::unordered_map<std::string_view, TokenKind> table{
      {"fn", TokenKind::Fn},         {"let", TokenKind::Let},       {"if", TokenKind::If},
      {"else", TokenKind::Else},     {"while", TokenKind::While},   {"return", TokenKind::Return},
      {"throw", TokenKind::Throw},   {"try", TokenKind::Try},       {"catch", TokenKind::Catch},
      {"true", TokenKind::True},     {"false", TokenKind::False},   {"nil", TokenKind::Nil},
      {"import", TokenKind::Import},
  };
  return table;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
public:
  Lexer(std::string_view src, const std::string& module) : src_(src), module_(module) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_trivia();
      Token tok;
      tok.line = line_;
      tok.col = col_;
      if (at_end()) {
        tok.kind = TokenKind::EndOfFile;
        tok.end_line = line_;
        tok.end_col = col_;
        out.push_back(std::move(tok));
        return out;
      }
      lex_one(tok);
      tok.end_line = line_;
      tok.end_col = col_;
      out.push_back(std::move(tok));
    }
  }

private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  [[noreturn]] void fail(int line, int col, const std::string& message) const {
    throw ParseError(SourceSpan{module_, line, col, line, col + 1}, message);
  }

  void skip_trivia() {
    while (!at_end()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') {
          advance();
        }
      } else {
        return;
      }
    }
  }

  void lex_one(Token& tok) {
    const char c = peek();
    if (is_ident_start(c)) {
      std::string word;
      while (!at_end() && is_ident_char(peek())) {
        word.push_back(advance());
      }
      auto it = keywords().find(word);
      tok.kind = it == keywords().end() ? TokenKind::Identifier : it->second;
      tok.text = std::move(word);
      return;
    }
    if (is_digit(c)) {
      lex_number(tok);
      return;
    }
    if (c == '"') {
      lex_string(tok);
      return;
    }
    if (c == '#') {
      constexpr std::string_view kExample = "#example";
      if (src_.substr(pos_, kExample.size()) == kExample && !is_ident_char(peek(kExample.size()))) {
        for (std::size_t i = 0; i < kExample.size(); ++i) {
          advance();
        }
        tok.kind = TokenKind::Example;
        tok.text = std::string(kExample);
        return;
      }
      fail(line_, col_, "unexpected '#'");
    }
    if (c == '@') {
      if (peek(1) == '{') {
        advance();
        advance();
        tok.kind = TokenKind::ProbeOpen;
        tok.text = "@{";
        return;
      }
      fail(line_, col_, "expected '{' after '@'");
    }
    lex_punct(tok);
  }

  void lex_number(Token& tok) {
    std::string digits;
    while (!at_end() && is_digit(peek())) {
      digits.push_back(advance());
    }
    tok.kind = TokenKind::Integer;
    if (peek() == '.' && is_digit(peek(1))) {
      digits.push_back(advance());
      while (!at_end() && is_digit(peek())) {
        digits.push_back(advance());
      }
      tok.kind = TokenKind::Float;
    }
    if (is_ident_start(peek())) {
      fail(line_, col_, "malformed number");
    }
    tok.text = std::move(digits);
  }

  void lex_string(Token& tok) {
    const int line = line_;
    const int col = col_;
    advance();
    std::string value;
    for (;;) {
      if (at_end() || peek() == '\n') {
        fail(line, col, "unterminated string literal");
      }
      const char c = advance();
      if (c == '"') {
        break;
      }
      if (c == '\\') {
        if (at_end()) {
          fail(line, col, "unterminated string literal");
        }
        const char e = advance();
        switch (e) {
        case 'n': value.push_back('\n'); break;
        case 't': value.push_back('\t'); break;
        case '"': value.push_back('"'); break;
        case '\\': value.push_back('\\'); break;
        default: fail(line_, col_ - 1, std::string("unknown escape '\\") + e + "'");
        }
        continue;
      }
      value.push_back(c);
    }
    tok.kind = TokenKind::String;
    tok.text = std::move(value);
  }

  void lex_punct(Token& tok) {
    const int line = line_;
    const int col = col_;
    const char c = advance();
    auto two = [&](char next, TokenKind yes, TokenKind no) {
      if (peek() == next) {
        advance();
        tok.kind = yes;
      } else {
        tok.kind = no;
      }
    };
    switch (c) {
    case '(': tok.kind = TokenKind::LParen; break;
    case ')': tok.kind = TokenKind::RParen; break;
    case '{': tok.kind = TokenKind::LBrace; break;
    case '}': tok.kind = TokenKind::RBrace; break;
    case '[': tok.kind = TokenKind::LBracket; break;
    case ']': tok.kind = TokenKind::RBracket; break;
    case ',': tok.kind = TokenKind::Comma; break;
    case ';': tok.kind = TokenKind::Semicolon; break;
    case ':': tok.kind = TokenKind::Colon; break;
    case '.': tok.kind = TokenKind::Dot; break;
    case '+': tok.kind = TokenKind::Plus; break;
    case '-': tok.kind = TokenKind::Minus; break;
    case '*': tok.kind = TokenKind::Star; break;
    case '/': tok.kind = TokenKind::Slash; break;
    case '%': tok.kind = TokenKind::Percent; break;
    case '=': two('=', TokenKind::EqualEqual, TokenKind::Assign); break;
    case '!': two('=', TokenKind::BangEqual, TokenKind::Bang); break;
    case '<': two('=', TokenKind::LessEqual, TokenKind::Less); break;
    case '>': two('=', TokenKind::GreaterEqual, TokenKind::Greater); break;
    case '&':
      if (peek() != '&') {
        fail(line, col, "expected '&&'");
      }
      advance();
      tok.kind = TokenKind::AndAnd;
      break;
    case '|':
      if (peek() != '|') {
        fail(line, col, "expected '||'");
      }
      advance();
      tok.kind = TokenKind::OrOr;
      break;
    default: fail(line, col, std::string("unexpected character '") + c + "'");
    }
  }

  std::string_view src_;
  const std::string& module_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

} // namespace

std::vector<Token> tokenize(std::string_view source, const std::string& module_path) {
  return Lexer(source, module_path).run();
}

} // namespace crosscut::lang
