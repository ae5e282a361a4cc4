#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "groupblame/source_span.hpp"

namespace groupblame::causal {

// Boolean combination of primitive events `X = x`.
class OutcomeFormula {
 public:
  enum class Kind { True, False, Event, Not, And, Or };

  OutcomeFormula();  // true

  static OutcomeFormula truth();
  static OutcomeFormula falsity();
  static OutcomeFormula event(std::string variable, std::string value, SourceSpan span = {});
  static OutcomeFormula negation(OutcomeFormula f);
  static OutcomeFormula conjunction(OutcomeFormula a, OutcomeFormula b);
  static OutcomeFormula disjunction(OutcomeFormula a, OutcomeFormula b);

  Kind kind() const;
  const std::string& variable() const;
  const std::string& value() const;
  const std::vector<OutcomeFormula>& operands() const;
  const SourceSpan& span() const;

  // `value_of` returns the current value of a variable by name.
  bool satisfied(const std::function<std::string_view(std::string_view)>& value_of) const;

  // (variable, value) pairs of every primitive event.
  void collect_events(std::vector<const OutcomeFormula*>& out) const;
  std::set<std::string> variables() const;

  std::string to_string() const;

  friend bool operator==(const OutcomeFormula& a, const OutcomeFormula& b);

 private:
  struct Node;
  explicit OutcomeFormula(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

}  // namespace groupblame::causal
