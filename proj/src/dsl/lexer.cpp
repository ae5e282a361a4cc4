#include "groupblame/dsl/lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace groupblame::dsl {

std::string_view token_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::LBrace: return "`{`";
    case TokenKind::RBrace: return "`}`";
    case TokenKind::LParen: return "`(`";
    case TokenKind::RParen: return "`)`";
    case TokenKind::Comma: return "`,`";
    case TokenKind::Colon: return "`:`";
    case TokenKind::Semicolon: return "`;`";
    case TokenKind::Dot: return "`.`";
    case TokenKind::DotDot: return "`..`";
    case TokenKind::Assign: return "`=`";
    case TokenKind::NotEqual: return "`!=`";
    case TokenKind::Less: return "`<`";
    case TokenKind::LessEq: return "`<=`";
    case TokenKind::Greater: return "`>`";
    case TokenKind::GreaterEq: return "`>=`";
    case TokenKind::Plus: return "`+`";
    case TokenKind::Minus: return "`-`";
    case TokenKind::Star: return "`*`";
    case TokenKind::Tilde: return "`~`";
    case TokenKind::Arrow: return "`->`";
    case TokenKind::PlusAssign: return "`+=`";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  std::string out = file.empty() ? "<input>" : file;
  if (d.span.known()) out += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column);
  out += d.severity == Severity::Error ? ": error[" : ": warning[";
  out += d.code + "]: " + d.message;
  return out;
}

namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }
bool digit(unsigned char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::vector<Token> tokenize(std::string_view src, std::vector<Diagnostic>& diagnostics) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  std::size_t line = 1;
  std::size_t line_start = 0;
  auto span_at = [&](std::size_t start, std::size_t len) {
    return SourceSpan{line, start - line_start + 1, start, len};
  };
  auto push = [&](TokenKind kind, std::size_t start, std::size_t len) {
    tokens.push_back(Token{kind, std::string(src.substr(start, len)), 0, span_at(start, len)});
  };

  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (c == '\n') {
      ++i;
      ++line;
      line_start = i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < src.size() && ident_char(static_cast<unsigned char>(src[i]))) ++i;
      push(TokenKind::Identifier, start, i - start);
      continue;
    }
    if (digit(c)) {
      while (i < src.size() && digit(static_cast<unsigned char>(src[i]))) ++i;
      // A fraction needs a digit after the dot, so `0..7` lexes as a range.
      if (i + 1 < src.size() && src[i] == '.' && digit(static_cast<unsigned char>(src[i + 1]))) {
        ++i;
        while (i < src.size() && digit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && digit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && digit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      Token t{TokenKind::Number, std::string(src.substr(start, i - start)), 0, span_at(start, i - start)};
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
        diagnostics.push_back({Severity::Error, "invalid_number",
                               "number `" + t.text + "` is out of range", t.span});
        continue;
      }
      tokens.push_back(std::move(t));
      continue;
    }
    auto two = [&](char next) { return i + 1 < src.size() && src[i + 1] == next; };
    TokenKind kind;
    std::size_t len = 1;
    switch (c) {
      case '{': kind = TokenKind::LBrace; break;
      case '}': kind = TokenKind::RBrace; break;
      case '(': kind = TokenKind::LParen; break;
      case ')': kind = TokenKind::RParen; break;
      case ',': kind = TokenKind::Comma; break;
      case ':': kind = TokenKind::Colon; break;
      case ';': kind = TokenKind::Semicolon; break;
      case '~': kind = TokenKind::Tilde; break;
      case '*': kind = TokenKind::Star; break;
      case '=': kind = TokenKind::Assign; break;
      case '.':
        kind = two('.') ? TokenKind::DotDot : TokenKind::Dot;
        len = kind == TokenKind::DotDot ? 2 : 1;
        break;
      case '<':
        kind = two('=') ? TokenKind::LessEq : TokenKind::Less;
        len = kind == TokenKind::LessEq ? 2 : 1;
        break;
      case '>':
        kind = two('=') ? TokenKind::GreaterEq : TokenKind::Greater;
        len = kind == TokenKind::GreaterEq ? 2 : 1;
        break;
      case '+':
        kind = two('=') ? TokenKind::PlusAssign : TokenKind::Plus;
        len = kind == TokenKind::PlusAssign ? 2 : 1;
        break;
      case '-':
        kind = two('>') ? TokenKind::Arrow : TokenKind::Minus;
        len = kind == TokenKind::Arrow ? 2 : 1;
        break;
      case '!':
        if (two('=')) {
          kind = TokenKind::NotEqual;
          len = 2;
          break;
        }
        [[fallthrough]];
      default: {
        // Swallow a whole UTF-8 sequence so one bad character is one error.
        std::size_t n = 1;
        if (c >= 0xC0) {
          while (i + n < src.size() && (static_cast<unsigned char>(src[i + n]) & 0xC0) == 0x80 && n < 4) ++n;
        }
        char shown[16];
        if (std::isprint(c)) {
          std::snprintf(shown, sizeof shown, "`%c`", c);
        } else {
          std::snprintf(shown, sizeof shown, "byte 0x%02x", c);
        }
        diagnostics.push_back({Severity::Error, "unexpected_character",
                               std::string("unexpected character ") + shown, span_at(i, n)});
        i += n;
        continue;
      }
    }
    push(kind, start, len);
    i += len;
  }
  tokens.push_back(Token{TokenKind::End, "", 0, span_at(src.size(), 0)});
  return tokens;
}

}  // namespace groupblame::dsl
