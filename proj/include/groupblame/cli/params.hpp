#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "groupblame/blame/scenario.hpp"

namespace groupblame::cli {

// Bad command-line input; the CLI exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dotted path to one numeric leaf of a scenario:
//
//   N
//   baseline_cost[.k]
//   exogenous.<U|*>.<value>
//   option.<name>.cost[.k]
//   option.<name>.shift.<U|*>.<value>[.k]
//   option.<name>.set.<U>.<value>[.k]
//
// k picks the k-th number literal of an expression in pre-order and may be
// omitted when there is exactly one. `*` matches every variable.
//
// Throws UsageError for a path that names nothing.
blame::Scenario with_parameter(const blame::Scenario& scenario, const std::string& path, double value);

// Current value at `path` (the first match for `*`).
double parameter_value(const blame::Scenario& scenario, const std::string& path);

// "lo:hi:step", inclusive of hi up to rounding.
std::vector<double> sweep_values(const std::string& range);

}  // namespace groupblame::cli
