#pragma once

#include <string>
#include <vector>

#include "groupblame/blame/scenario.hpp"

namespace groupblame::dsl {

// One stored expectation for a built-in scenario.
//
// Quantities: "group_gb" (gb of the full group), "argmax" (its option
// instance), "delta_full" (probability drop behind group_gb) and
// "shapley.<agent>" (exact attribution).
struct Expectation {
  enum class Check { Near, AtLeast, Equals };

  std::string quantity;
  Check check = Check::Near;
  double value = 0;
  double tolerance = 0;
  std::string text;  // Equals only

  bool accepts(double actual) const;
  bool accepts(const std::string& actual) const { return actual == text; }
};

struct Builtin {
  std::string name;
  std::string summary;
  std::string source;
  std::vector<Expectation> expected;
};

const std::vector<Builtin>& builtins();
std::vector<std::string> builtin_names();

// Throws UnknownScenario listing the available names.
const Builtin& find_builtin(const std::string& name);
// Parsed scenario; throws InvalidScenario if the stored source is broken.
blame::Scenario builtin(const std::string& name);

}  // namespace groupblame::dsl
