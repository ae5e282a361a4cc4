#include "groupblame/blame/single.hpp"

#include <algorithm>
#include <cmath>

#include "groupblame/error.hpp"

namespace groupblame::blame {

namespace {

const causal::Variable& action_variable(const epistemic::EpistemicState& state,
                                        const std::string& action) {
  const auto& sig = state.signature();
  if (!sig.agent_of.contains(action)) {
    throw SignatureMismatch("`" + action + "` is not an action variable");
  }
  return *sig.find(action);
}

double cost_of(const ActionCosts& costs, const std::string& value) {
  auto it = costs.find(value);
  if (it == costs.end()) throw InvalidScenario("no cost given for action value `" + value + "`");
  return it->second;
}

void check_costs(const causal::Variable& var, const ActionCosts& costs, double balance) {
  double max_cost = 0;
  for (const auto& v : var.range) {
    double c = cost_of(costs, v);
    if (!std::isfinite(c) || c < 0) {
      throw InvalidScenario("cost of `" + v + "` must be finite and nonnegative");
    }
    max_cost = std::max(max_cost, c);
  }
  if (!(balance > max_cost) || std::isinf(balance)) {
    throw BalanceTooSmall("balance N = " + causal::format_number(balance) +
                          " must exceed the largest action cost " + causal::format_number(max_cost));
  }
}

double weighted(double delta, const ActionCosts& costs, double balance, const std::string& a,
                const std::string& a_alt) {
  double extra = std::max(cost_of(costs, a_alt) - cost_of(costs, a), 0.0);
  return delta * (balance - extra) / balance;
}

}  // namespace

double delta_single(const epistemic::EpistemicState& state, const std::string& action,
                    const std::string& a, const std::string& a_alt, const causal::OutcomeFormula& phi,
                    const epistemic::QueryOptions& options) {
  action_variable(state, action);
  double p = epistemic::prob(state, {{action, a}}, phi, options).value;
  double p_alt = epistemic::prob(state, {{action, a_alt}}, phi, options).value;
  return std::max(0.0, p - p_alt);
}

double db_single(const epistemic::EpistemicState& state, const ActionCosts& costs, double balance,
                 const std::string& action, const std::string& a, const std::string& a_alt,
                 const causal::OutcomeFormula& phi, const epistemic::QueryOptions& options) {
  check_costs(action_variable(state, action), costs, balance);
  return weighted(delta_single(state, action, a, a_alt, phi, options), costs, balance, a, a_alt);
}

SingleBlame db_single_max(const epistemic::EpistemicState& state, const ActionCosts& costs,
                          double balance, const std::string& action, const std::string& a,
                          const causal::OutcomeFormula& phi, const epistemic::QueryOptions& options) {
  const auto& var = action_variable(state, action);
  check_costs(var, costs, balance);
  if (!var.index_of(a)) {
    throw SignatureMismatch("`" + a + "` is not in the range of `" + action + "`");
  }
  double p = epistemic::prob(state, {{action, a}}, phi, options).value;
  SingleBlame best{-1.0, ""};
  for (const auto& alt : var.range) {
    double p_alt = epistemic::prob(state, {{action, alt}}, phi, options).value;
    double v = weighted(std::max(0.0, p - p_alt), costs, balance, a, alt);
    if (v > best.value) best = {v, alt};
  }
  return best;
}

}  // namespace groupblame::blame
