#pragma once

// Hand-built committee models for tests that must not depend on the
// scenario parser.

#include <string>
#include <vector>

#include "groupblame/causal/model.hpp"

namespace groupblame::testing {

inline causal::Variable yes_no(std::string name, causal::VariableKind kind) {
  return causal::Variable{std::move(name), kind, {"yes", "no"}};
}

// Votes A1..A7 copied from exogenous U1..U7; Pass = yes iff at least 4 yes.
inline causal::CausalModel committee_model() {
  using causal::BinaryOp;
  using causal::Expr;
  causal::Signature sig;
  std::vector<causal::StructuralEquation> eqs;
  std::vector<Expr> yes_votes;
  for (int i = 1; i <= 7; ++i) {
    std::string u = "U" + std::to_string(i);
    std::string a = "A" + std::to_string(i);
    sig.exogenous.push_back(yes_no(u, causal::VariableKind::Exogenous));
    sig.endogenous.push_back(yes_no(a, causal::VariableKind::Endogenous));
    sig.agent_of[a] = AgentId{"a" + std::to_string(i)};
    eqs.push_back({a, Expr::identifier(u)});
    yes_votes.push_back(Expr::binary(BinaryOp::Eq, Expr::identifier(a), Expr::identifier("yes")));
  }
  sig.endogenous.push_back(yes_no("Pass", causal::VariableKind::Endogenous));
  eqs.push_back({"Pass", Expr::conditional(Expr::binary(BinaryOp::Ge, Expr::count(yes_votes),
                                                        Expr::number(4)),
                                           Expr::identifier("yes"), Expr::identifier("no"))});
  return causal::CausalModel(std::move(sig), std::move(eqs));
}

// Context from a list of seven votes ("yes"/"no").
inline causal::Context votes(const std::vector<std::string>& v) {
  std::vector<std::size_t> idx;
  for (const auto& s : v) idx.push_back(s == "yes" ? 0 : 1);
  return causal::Context(idx);
}

// The committee as seen by `focal` (1-based): the focal vote is fixed to
// `focal_vote`, the other six copy exogenous U<i>.
inline causal::CausalModel committee_focal_model(int focal, const std::string& focal_vote) {
  using causal::BinaryOp;
  using causal::Expr;
  causal::Signature sig;
  std::vector<causal::StructuralEquation> eqs;
  std::vector<Expr> yes_votes;
  for (int i = 1; i <= 7; ++i) {
    std::string u = "U" + std::to_string(i);
    std::string a = "A" + std::to_string(i);
    if (i != focal) sig.exogenous.push_back(yes_no(u, causal::VariableKind::Exogenous));
    sig.endogenous.push_back(yes_no(a, causal::VariableKind::Endogenous));
    sig.agent_of[a] = AgentId{"a" + std::to_string(i)};
    eqs.push_back({a, i == focal ? Expr::identifier(focal_vote) : Expr::identifier(u)});
    yes_votes.push_back(Expr::binary(BinaryOp::Eq, Expr::identifier(a), Expr::identifier("yes")));
  }
  sig.endogenous.push_back(yes_no("Pass", causal::VariableKind::Endogenous));
  eqs.push_back({"Pass", Expr::conditional(Expr::binary(BinaryOp::Ge, Expr::count(yes_votes),
                                                        Expr::number(4)),
                                           Expr::identifier("yes"), Expr::identifier("no"))});
  return causal::CausalModel(std::move(sig), std::move(eqs));
}

}  // namespace groupblame::testing
