#pragma once

#include <string>
#include <vector>

#include "groupblame/source_span.hpp"

namespace groupblame::dsl {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;  // stable identifier, e.g. "unbound_symbol"
  std::string message;
  SourceSpan span;

  bool operator==(const Diagnostic&) const = default;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.severity == Severity::Error) return true;
  }
  return false;
}

// "file:line:col: error[code]: message"
std::string format_diagnostic(const Diagnostic& d, const std::string& file = "");

}  // namespace groupblame::dsl
