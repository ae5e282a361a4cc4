#pragma once

// Committee scenarios assembled directly from library types, plus a
// binomial oracle for their group blame values.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>

#include "groupblame/blame/scenario.hpp"
#include "support/binomial_oracle.hpp"
#include "support/committee_model.hpp"

namespace groupblame::testing {

struct CommitteeParams {
  int focal = 1;
  std::string vote = "no";
  double p = 0.6;
  double eff = 0.05;
  double unit = 100;
  std::optional<double> switch_cost = 2000;
  double balance = 5000;
  bool switch_only = true;   // pressured_switch starts at n = 0
  bool focal_counts = true;  // the focal agent counts toward n
};

inline blame::Scenario committee_scenario(const CommitteeParams& c) {
  using causal::BinaryOp;
  using causal::Expr;
  auto model = committee_focal_model(c.focal, c.vote);
  std::vector<epistemic::Marginal> marginals;
  for (const auto& u : model.signature().exogenous) marginals.push_back({u.name, {c.p, 1 - c.p}});

  auto n = Expr::identifier("n");
  std::vector<blame::Effect> shifts;
  for (const auto& u : model.signature().exogenous) {
    shifts.push_back(blame::ShiftMarginal{u.name, "yes", Expr::binary(BinaryOp::Mul, n, Expr::number(c.eff))});
  }
  std::vector<AgentId> agents;
  for (int i = 1; i <= 7; ++i) agents.push_back({"a" + std::to_string(i)});
  const AgentId focal{"a" + std::to_string(c.focal)};

  std::vector<blame::OptionTemplate> menu;
  menu.push_back({"pressure", blame::SizeParameter{"n", 1, 7}, {}, {},
                  Expr::binary(BinaryOp::Mul, n, Expr::number(c.unit)), shifts});
  if (!c.focal_counts) menu.back().uncounted_agents.push_back(focal);
  if (c.switch_cost) {
    auto effects = shifts;
    effects.push_back(blame::SetAction{"A" + std::to_string(c.focal), "yes"});
    blame::OptionTemplate sw{"pressured_switch",
                             blame::SizeParameter{"n", c.switch_only ? 0 : 1, 7},
                             {focal},
                             {},
                             Expr::binary(BinaryOp::Add, Expr::binary(BinaryOp::Mul, n, Expr::number(c.unit)),
                                          Expr::number(*c.switch_cost)),
                             effects};
    if (!c.focal_counts) sw.uncounted_agents.push_back(focal);
    menu.push_back(sw);
  }
  return blame::Scenario{"committee_" + focal.name,
                         agents,
                         epistemic::EpistemicState::factored(model, marginals),
                         causal::OutcomeFormula::event("Pass", "no"),
                         menu,
                         Expr::number(0),
                         c.balance,
                         focal.name};
}

// gb(S) from binomial tails, with S a bitmask over a1..a7.
inline double committee_gb_oracle(const CommitteeParams& c, std::uint64_t s) {
  const int k = std::popcount(s);
  if (k == 0) return 0;
  const bool focal_in = (s >> (c.focal - 1)) & 1u;
  const int fixed = c.vote == "yes" ? 1 : 0;
  const double p1 = committee_fail(6, fixed, c.p);
  auto relative = [&](double p2, double cost) {
    return std::max(0.0, p1 - p2) * (c.balance - std::max(cost, 0.0)) / c.balance;
  };
  const int counted = c.focal_counts || !focal_in ? k : k - 1;
  double best = 0;
  for (int n = 1; n <= counted; ++n) {
    best = std::max(best, relative(committee_fail(6, fixed, std::min(1.0, c.p + n * c.eff)), n * c.unit));
  }
  if (focal_in && c.switch_cost) {
    for (int n = c.switch_only ? 0 : 1; n <= counted; ++n) {
      best = std::max(best, relative(committee_fail(6, 1, std::min(1.0, c.p + n * c.eff)),
                                     n * c.unit + *c.switch_cost));
    }
  }
  return best;
}

// The six committee members' beliefs as parameter sets.
inline CommitteeParams committee_params(int focal) {
  CommitteeParams c;
  c.focal = focal;
  switch (focal) {
    case 2: c.switch_cost = 500; break;
    case 3: c.eff = 0.03; break;
    case 4: c.unit = 150; break;
    case 5: c.p = 0.4; break;
    case 6:
      c.vote = "yes";
      c.switch_cost.reset();
      break;
    default: break;
  }
  return c;
}

}  // namespace groupblame::testing
