#pragma once

#include <cstddef>

namespace groupblame {

// Location of a token range in scenario source text. Line and column are
// 1-based; a default-constructed span (line 0) means "no location".
struct SourceSpan {
  std::size_t line = 0;
  std::size_t column = 0;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool known() const { return line != 0; }
  std::size_t end() const { return offset + length; }

  // Smallest span covering both.
  static SourceSpan cover(const SourceSpan& a, const SourceSpan& b) {
    if (!a.known()) return b;
    if (!b.known()) return a;
    const SourceSpan& first = a.offset <= b.offset ? a : b;
    SourceSpan out = first;
    std::size_t end = a.end() > b.end() ? a.end() : b.end();
    out.length = end - first.offset;
    return out;
  }

  bool operator==(const SourceSpan&) const = default;
};

}  // namespace groupblame
