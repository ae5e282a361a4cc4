#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groupblame/blame/scenario.hpp"
#include "groupblame/dsl/diagnostic.hpp"

namespace groupblame::dsl {

// Either a scenario or at least one error, never both. Warnings may
// accompany a scenario.
struct ParseResult {
  std::optional<blame::Scenario> scenario;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return scenario.has_value(); }
};

// Deepest expression nesting the parser accepts.
inline constexpr std::size_t kMaxNesting = 200;
// Largest span of an option's size parameter.
inline constexpr int kMaxOptionSize = 1000;

ParseResult parse(std::string_view source);

template <typename T>
struct Parsed {
  std::optional<T> value;
  std::vector<Diagnostic> diagnostics;
};

// Standalone expression or outcome formula, as used on the command line.
Parsed<causal::Expr> parse_expression(std::string_view source);
Parsed<causal::OutcomeFormula> parse_formula(std::string_view source);

// Words that cannot name variables, agents, values or options.
bool is_reserved(std::string_view word);

// Name order with digit runs compared as numbers: a2 < a10.
bool natural_less(const std::string& a, const std::string& b);

}  // namespace groupblame::dsl
