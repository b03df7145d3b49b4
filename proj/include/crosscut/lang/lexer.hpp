#pragma once

#include "crosscut/lang/source.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace crosscut::lang {

enum class TokenKind {
  Identifier,
  Integer,
  Float,
  String,
  // keywords
  Fn,
  Let,
  If,
  Else,
  While,
  Return,
  Throw,
  Try,
  Catch,
  True,
  False,
  Nil,
  Import,
  Example, // "#example"
  ProbeOpen, // "@{"
  // punctuation
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Comma,
  Semicolon,
  Colon,
  Dot,
  Assign,
  EqualEqual,
  BangEqual,
  Less,
  LessEqual,
  Greater,
  GreaterEqual,
  Plus,
  Minus,
  Star,
  Slash,
  Percent,
  Bang,
  AndAnd,
  OrOr,
  EndOfFile,
};

std::string_view token_kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::EndOfFile;
  std::string text; // identifier name, decoded string literal, or numeral
  int line = 1;
  int col = 1;
  int end_line = 1;
  int end_col = 1;
};

// Throws ParseError on malformed input. The final token is EndOfFile.
std::vector<Token> tokenize(std::string_view source, const std::string& module_path);

} // namespace crosscut::lang
