#pragma once

#include <map>
#include <string>

#include "groupblame/epistemic/state.hpp"

namespace groupblame::blame {

// Costs of an agent's actions, keyed by value of its action variable.
using ActionCosts = std::map<std::string, double>;

// max(0, Pr([A=a] phi) - Pr([A=a_alt] phi)). Throws SignatureMismatch when
// `action` is not an action variable or a value is out of range.
double delta_single(const epistemic::EpistemicState& state, const std::string& action,
                    const std::string& a, const std::string& a_alt, const causal::OutcomeFormula& phi,
                    const epistemic::QueryOptions& options = {});

// delta * (N - max(c(a_alt) - c(a), 0)) / N. Throws BalanceTooSmall when
// N <= max cost, InvalidScenario when `costs` misses a value.
double db_single(const epistemic::EpistemicState& state, const ActionCosts& costs, double balance,
                 const std::string& action, const std::string& a, const std::string& a_alt,
                 const causal::OutcomeFormula& phi, const epistemic::QueryOptions& options = {});

struct SingleBlame {
  double value = 0;
  std::string alternative;
};

// Max over alternatives in range order; the first maximum wins.
SingleBlame db_single_max(const epistemic::EpistemicState& state, const ActionCosts& costs,
                          double balance, const std::string& action, const std::string& a,
                          const causal::OutcomeFormula& phi,
                          const epistemic::QueryOptions& options = {});

}  // namespace groupblame::blame
