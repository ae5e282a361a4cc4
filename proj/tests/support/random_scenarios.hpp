#pragma once

// Seeded random scenarios for property checks.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "groupblame/blame/scenario.hpp"
#include "groupblame/blame/single.hpp"

namespace groupblame::testing {

namespace detail {

inline causal::Expr eq(const std::string& l, const std::string& r) {
  return causal::Expr::binary(causal::BinaryOp::Eq, causal::Expr::identifier(l), causal::Expr::identifier(r));
}

inline std::vector<std::size_t> random_subset(std::size_t m, std::mt19937_64& rng, bool nonempty) {
  std::vector<std::size_t> out;
  while (out.empty()) {
    for (std::size_t i = 0; i < m; ++i) {
      if (rng() % 2) out.push_back(i);
    }
    if (!nonempty) break;
  }
  return out;
}

}  // namespace detail

// Voting-style group scenario with up to `max_agents` agents. Agent i owns
// vote Ai copied from Ui; the outcome is a threshold on yes votes. The menu
// mixes sized shift options with fixed set options, all with finite costs
// below N = 5000. Some baselines depend on coalition size.
inline blame::Scenario random_group_scenario(std::uint64_t seed, std::size_t max_agents = 6) {
  using causal::BinaryOp;
  using causal::Expr;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0, 1);
  const std::size_t m = 1 + rng() % max_agents;

  causal::Signature sig;
  std::vector<causal::StructuralEquation> eqs;
  std::vector<Expr> yes_votes;
  std::vector<epistemic::Marginal> marginals;
  std::vector<AgentId> agents;
  for (std::size_t i = 1; i <= m; ++i) {
    const std::string u = "U" + std::to_string(i);
    const std::string a = "A" + std::to_string(i);
    sig.exogenous.push_back({u, causal::VariableKind::Exogenous, {"yes", "no"}});
    sig.endogenous.push_back({a, causal::VariableKind::Endogenous, {"yes", "no"}});
    agents.push_back({"a" + std::to_string(i)});
    sig.agent_of[a] = agents.back();
    eqs.push_back({a, Expr::identifier(u)});
    yes_votes.push_back(detail::eq(a, "yes"));
    const double p = 0.1 + 0.8 * unif(rng);
    marginals.push_back({u, {p, 1 - p}});
  }
  const int threshold = 1 + static_cast<int>(rng() % m);
  sig.endogenous.push_back({"O", causal::VariableKind::Endogenous, {"yes", "no"}});
  eqs.push_back({"O", Expr::conditional(Expr::binary(BinaryOp::Ge, Expr::count(yes_votes),
                                                     Expr::number(threshold)),
                                        Expr::identifier("yes"), Expr::identifier("no"))});
  const auto outcome = causal::OutcomeFormula::event("O", rng() % 2 ? "yes" : "no");

  std::vector<blame::OptionTemplate> menu;
  const std::size_t options = 1 + rng() % 3;
  for (std::size_t k = 0; k < options; ++k) {
    blame::OptionTemplate t;
    t.name = "opt" + std::to_string(k);
    if (rng() % 2) {
      const int hi = 1 + static_cast<int>(rng() % m);
      t.size = blame::SizeParameter{"n", 1 + static_cast<int>(rng() % hi), hi};
      const double eff = 0.02 + 0.18 * unif(rng);
      const double unit = 10 + 390 * unif(rng);
      const double fixed = 500 * unif(rng);
      const std::string value = rng() % 2 ? "yes" : "no";
      if (rng() % 2) {
        for (auto i : detail::random_subset(m, rng, false)) t.required_agents.push_back(agents[i]);
      }
      for (auto i : detail::random_subset(m, rng, true)) {
        t.effects.push_back(blame::ShiftMarginal{
            "U" + std::to_string(i + 1), value,
            Expr::binary(BinaryOp::Mul, Expr::identifier("n"), Expr::number(eff))});
      }
      t.cost = Expr::binary(BinaryOp::Add, Expr::binary(BinaryOp::Mul, Expr::identifier("n"), Expr::number(unit)),
                            Expr::number(fixed));
    } else {
      for (auto i : detail::random_subset(m, rng, false)) t.required_agents.push_back(agents[i]);
      if (!t.required_agents.empty() && rng() % 2) {
        const auto& who = t.required_agents[rng() % t.required_agents.size()];
        t.effects.push_back(blame::SetAction{"A" + who.name.substr(1), rng() % 2 ? "yes" : "no"});
      } else {
        const double q = unif(rng);
        t.effects.push_back(blame::SetMarginal{"U" + std::to_string(1 + rng() % m),
                                               {{"yes", Expr::number(q)}, {"no", Expr::number(1 - q)}}});
      }
      t.cost = Expr::number(2000 * unif(rng));
    }
    menu.push_back(std::move(t));
  }
  // Now and then the status quo is cheaper for large coalitions, which can
  // break monotonicity.
  Expr baseline = Expr::number(0);
  if (rng() % 4 == 0) {
    baseline = Expr::conditional(
        Expr::binary(BinaryOp::Ge, Expr::identifier("size"), Expr::number(1 + static_cast<int>(rng() % m))),
        Expr::number(0), Expr::number(1500 * unif(rng)));
  }
  return blame::Scenario{"random_" + std::to_string(seed),
                         agents,
                         epistemic::EpistemicState::factored(causal::CausalModel(sig, eqs), marginals),
                         outcome,
                         menu,
                         baseline,
                         5000,
                         "society"};
}

// One agent choosing A among 2..4 actions; O is an arbitrary table over
// (A, U). The menu offers each action at its own cost.
struct SingleAgentCase {
  epistemic::EpistemicState state;
  std::string actual;
  blame::ActionCosts costs;
  double balance = 1500;
  blame::Scenario scenario;
};

inline SingleAgentCase random_single_agent(std::uint64_t seed) {
  using causal::BinaryOp;
  using causal::Expr;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0, 1);
  const std::size_t nu = 2 + rng() % 3;
  const std::size_t na = 2 + rng() % 3;
  std::vector<std::string> us, as;
  for (std::size_t i = 0; i < nu; ++i) us.push_back("u" + std::to_string(i));
  for (std::size_t i = 0; i < na; ++i) as.push_back("x" + std::to_string(i));
  const std::string actual = as[rng() % na];

  causal::Signature sig;
  sig.exogenous.push_back({"U", causal::VariableKind::Exogenous, us});
  sig.endogenous.push_back({"A", causal::VariableKind::Endogenous, as});
  sig.endogenous.push_back({"O", causal::VariableKind::Endogenous, {"yes", "no"}});
  sig.agent_of["A"] = AgentId{"ag"};
  Expr cond = Expr::boolean(false);
  for (const auto& a : as) {
    for (const auto& u : us) {
      if (rng() % 2) {
        cond = Expr::binary(BinaryOp::Or, cond,
                            Expr::binary(BinaryOp::And, detail::eq("A", a), detail::eq("U", u)));
      }
    }
  }
  causal::CausalModel model(sig, {{"A", Expr::identifier(actual)},
                                  {"O", Expr::conditional(cond, Expr::identifier("yes"), Expr::identifier("no"))}});
  std::vector<double> w(nu);
  double total = 0;
  for (auto& x : w) total += x = 0.05 + unif(rng);
  for (auto& x : w) x /= total;
  auto state = epistemic::EpistemicState::factored(model, {{"U", w}});

  blame::ActionCosts costs;
  std::vector<blame::OptionTemplate> menu;
  for (const auto& a : as) {
    costs[a] = 1000 * unif(rng);
    menu.push_back({"do_" + a, std::nullopt, {}, {}, Expr::number(costs[a]), {blame::SetAction{"A", a}}});
  }
  blame::Scenario scenario{"single_" + std::to_string(seed),
                           {AgentId{"ag"}},
                           state,
                           causal::OutcomeFormula::event("O", "yes"),
                           menu,
                           Expr::number(costs.at(actual)),
                           1500,
                           "ag"};
  return {state, actual, costs, 1500, scenario};
}

}  // namespace groupblame::testing
