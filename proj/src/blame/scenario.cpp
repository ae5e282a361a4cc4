#include "groupblame/blame/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "groupblame/error.hpp"

namespace groupblame::blame {

namespace {

// Binds a single numeric symbol; every other identifier stays a symbol.
class NumberBinding final : public causal::Environment {
 public:
  NumberBinding(std::string name, double value) : name_(std::move(name)), value_(value) {}
  std::optional<causal::Value> lookup(std::string_view name) const override {
    if (name == name_) return causal::Value{value_};
    return std::nullopt;
  }

 private:
  std::string name_;
  double value_;
};

double evaluate_with(const causal::Expr& expr, const std::string& symbol, double value) {
  return expr.evaluate_number(NumberBinding(symbol, value));
}

std::string symbol_of(const OptionTemplate& option) {
  return option.size ? option.size->symbol : std::string("n");
}

}  // namespace

std::vector<int> OptionTemplate::sizes() const {
  if (!size) return {0};
  std::vector<int> out;
  for (int n = size->lo; n <= size->hi; ++n) out.push_back(n);
  return out;
}

std::optional<std::size_t> Scenario::agent_index(const AgentId& agent) const {
  return agent_index(agent.name);
}

std::optional<std::size_t> Scenario::agent_index(const std::string& name) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].name == name) return i;
  }
  return std::nullopt;
}

bool operator==(const Scenario& a, const Scenario& b) {
  auto sorted = [](std::vector<AgentId> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return a.name == b.name && sorted(a.agents) == sorted(b.agents) && a.base_state == b.base_state &&
         a.outcome == b.outcome && a.menu == b.menu && a.baseline_cost == b.baseline_cost &&
         a.balance == b.balance && a.focal_epistemics == b.focal_epistemics;
}

double instance_cost(const OptionTemplate& option, int n) {
  double c = evaluate_with(option.cost, symbol_of(option), n);
  if (std::isnan(c) || c < 0) {
    throw InvalidScenario("option `" + option.name + "` has cost " + causal::format_number(c) +
                          " at n = " + std::to_string(n) + "; costs must be nonnegative");
  }
  return c;
}

double baseline_cost(const Scenario& scenario, std::size_t coalition_size) {
  double c = evaluate_with(scenario.baseline_cost, "size", static_cast<double>(coalition_size));
  if (!(c >= 0) || std::isinf(c)) {
    throw InvalidScenario("baseline cost is " + causal::format_number(c) + " for a coalition of " +
                          std::to_string(coalition_size) + "; it must be finite and nonnegative");
  }
  return c;
}

std::string instance_id(const OptionTemplate& option, int n) {
  if (!option.size) return option.name;
  return option.name + "(" + std::to_string(n) + ")";
}

namespace {

std::vector<double> shifted(const std::vector<double>& probs, std::size_t target, double delta) {
  std::vector<double> out = probs;
  const double old_p = probs[target];
  double new_p = std::clamp(old_p + delta, 0.0, 1.0);
  if (probs.size() == 1) new_p = 1.0;
  out[target] = new_p;
  const double old_rest = 1.0 - old_p;
  const double new_rest = 1.0 - new_p;
  const std::size_t others = probs.size() - 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (i == target) continue;
    out[i] = old_rest > 0 ? probs[i] * (new_rest / old_rest) : new_rest / static_cast<double>(others);
  }
  return out;
}

const causal::Variable& exogenous_variable(const epistemic::EpistemicState& state,
                                           const std::string& name, const std::string& option) {
  for (const auto& v : state.signature().exogenous) {
    if (v.name == name) return v;
  }
  throw InvalidScenario("option `" + option + "` refers to `" + name +
                        "`, which is not an exogenous variable");
}

std::size_t value_index(const causal::Variable& var, const std::string& value,
                        const std::string& option) {
  auto idx = var.index_of(value);
  if (!idx) {
    throw InvalidScenario("option `" + option + "`: `" + value + "` is not in the range of `" +
                          var.name + "`");
  }
  return *idx;
}

const epistemic::FactoredState& require_factored(const epistemic::EpistemicState& state,
                                                 const std::string& option) {
  const auto* f = state.as_factored();
  if (!f) {
    throw InvalidScenario("option `" + option +
                          "` changes a marginal, which needs a factored base state");
  }
  return *f;
}

std::vector<double> marginal_of(const epistemic::FactoredState& f, const std::string& variable) {
  for (const auto& m : f.marginals) {
    if (m.variable == variable) return m.probabilities;
  }
  return {};
}

}  // namespace

epistemic::EpistemicState apply_effects(const epistemic::EpistemicState& state,
                                        const OptionTemplate& option, int n) {
  const std::string symbol = symbol_of(option);
  epistemic::EpistemicState current = state;
  for (const auto& effect : option.effects) {
    if (const auto* shift = std::get_if<ShiftMarginal>(&effect)) {
      const auto& f = require_factored(current, option.name);
      const auto& var = exogenous_variable(current, shift->variable, option.name);
      std::size_t target = value_index(var, shift->value, option.name);
      double delta = evaluate_with(shift->delta, symbol, n);
      if (!std::isfinite(delta)) {
        throw InvalidScenario("option `" + option.name + "` shifts `" + shift->variable +
                              "` by a non-finite amount");
      }
      current = current.with_marginal(var.name, shifted(marginal_of(f, var.name), target, delta));
    } else if (const auto* set = std::get_if<SetMarginal>(&effect)) {
      require_factored(current, option.name);
      const auto& var = exogenous_variable(current, set->variable, option.name);
      std::vector<double> probs(var.range.size(), 0.0);
      for (const auto& [value, expr] : set->distribution) {
        probs[value_index(var, value, option.name)] = evaluate_with(expr, symbol, n);
      }
      try {
        current = current.with_marginal(var.name, std::move(probs));
      } catch (const InvalidState& e) {
        throw InvalidScenario("option `" + option.name + "`: " + e.what());
      }
    } else {
      const auto& action = std::get<SetAction>(effect);
      const auto& sig = current.signature();
      if (!sig.agent_of.contains(action.variable)) {
        throw InvalidScenario("option `" + option.name + "` sets `" + action.variable +
                              "`, which is not an action variable");
      }
      value_index(*sig.find(action.variable), action.value, option.name);
      causal::StructuralEquation eq{action.variable, causal::Expr::identifier(action.value)};
      current = current.map_models(
          [&](const causal::CausalModel& m) { return m.with_equation(eq); });
    }
  }
  return current;
}

std::vector<ScenarioIssue> check_scenario(const Scenario& s) {
  std::vector<ScenarioIssue> issues;
  auto add = [&](std::string code, std::string message, std::optional<std::size_t> option = {},
                 SourceSpan span = {}) {
    issues.push_back({std::move(code), std::move(message), option, span});
  };

  if (s.agents.empty()) add("no_agents", "scenario has no agents");
  if (s.agents.size() > kMaxAgents) {
    add("too_many_agents", "scenario has more than " + std::to_string(kMaxAgents) + " agents");
  }
  std::set<std::string> names;
  for (const auto& a : s.agents) {
    if (!names.insert(a.name).second) add("duplicate_agent", "agent `" + a.name + "` is listed twice");
  }

  const auto& sig = s.base_state.signature();
  for (const auto& [var, agent] : sig.agent_of) {
    if (!names.contains(agent.name)) {
      add("unknown_agent", "action `" + var + "` belongs to `" + agent.name +
                               "`, which is not a scenario agent");
    }
  }
  try {
    causal::check_formula(sig, s.outcome);
  } catch (const Error& e) {
    add("unknown_variable", e.what());
  }

  if (!(s.balance > 0) || std::isinf(s.balance)) {
    add("invalid_balance", "balance N must be a positive finite number, got " +
                               causal::format_number(s.balance));
  }
  const bool balance_ok = s.balance > 0 && std::isfinite(s.balance);

  for (std::size_t size = 0; size <= s.agents.size(); ++size) {
    try {
      double c = baseline_cost(s, size);
      if (balance_ok && c >= s.balance) {
        add("balance_too_small", "baseline cost " + causal::format_number(c) +
                                     " is not below the balance N = " +
                                     causal::format_number(s.balance),
            std::nullopt, s.baseline_cost.span());
        break;
      }
    } catch (const Error& e) {
      add("invalid_cost", e.what(), std::nullopt, s.baseline_cost.span());
      break;
    }
  }

  std::set<std::string> option_names;
  for (std::size_t i = 0; i < s.menu.size(); ++i) {
    const auto& opt = s.menu[i];
    if (!option_names.insert(opt.name).second) {
      add("duplicate_option", "option `" + opt.name + "` is declared twice", i);
    }
    if (opt.size && (opt.size->lo < 0 || opt.size->lo > opt.size->hi)) {
      add("invalid_size_range", "option `" + opt.name + "` has size range " +
                                    std::to_string(opt.size->lo) + ".." +
                                    std::to_string(opt.size->hi),
          i);
      continue;
    }
    for (const auto* list : {&opt.required_agents, &opt.uncounted_agents}) {
      for (const auto& a : *list) {
        if (!names.contains(a.name)) {
          add("unknown_agent", "option `" + opt.name + "` names unknown agent `" + a.name + "`", i);
        }
      }
    }
    for (int n : opt.sizes()) {
      double c = 0;
      try {
        c = instance_cost(opt, n);
      } catch (const Error& e) {
        add("invalid_cost", e.what(), i, opt.cost.span());
        break;
      }
      if (balance_ok && std::isfinite(c) && c >= s.balance) {
        add("balance_too_small", "option " + instance_id(opt, n) + " costs " +
                                     causal::format_number(c) + ", not below the balance N = " +
                                     causal::format_number(s.balance),
            i, opt.cost.span());
        break;
      }
      if (std::isinf(c)) continue;
      try {
        apply_effects(s.base_state, opt, n);
      } catch (const Error& e) {
        add("invalid_effect", e.what(), i);
        break;
      }
    }
  }
  return issues;
}

}  // namespace groupblame::blame
