#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "groupblame/dsl/diagnostic.hpp"

namespace groupblame::dsl {

enum class TokenKind {
  Identifier,
  Number,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Comma,
  Colon,
  Semicolon,
  Dot,
  DotDot,
  Assign,      // =
  NotEqual,    // !=
  Less,
  LessEq,
  Greater,
  GreaterEq,
  Plus,
  Minus,
  Star,
  Tilde,
  Arrow,       // ->
  PlusAssign,  // +=
  End,
};

std::string_view token_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0;
  SourceSpan span;
};

// Splits `source` into tokens; the last token is always End. Bad bytes and
// malformed numbers become diagnostics and are skipped.
std::vector<Token> tokenize(std::string_view source, std::vector<Diagnostic>& diagnostics);

}  // namespace groupblame::dsl
