#include "groupblame/dsl/builtins.hpp"

#include <cmath>
#include <optional>

#include "groupblame/causal/expr.hpp"
#include "groupblame/dsl/parser.hpp"
#include "groupblame/error.hpp"

namespace groupblame::dsl {

namespace {

using causal::format_number;

// A committee member's view: seven votes, the bill passes with four yes.
struct CommitteeSetup {
  int focal = 1;
  std::string vote = "no";
  double p = 0.6;
  double eff = 0.05;
  double unit = 100;
  std::optional<double> switch_cost = 2000;
};

std::string committee_source(const CommitteeSetup& c) {
  const std::string focal = std::to_string(c.focal);
  std::string s = "# Seven-member committee as seen by a" + focal + ".\n";
  s += "scenario committee_a" + focal + "\n";
  s += "agents a1, a2, a3, a4, a5, a6, a7\n";
  s += "param N = 5000\n";
  s += "param focal = a" + focal + "\n\n";
  for (int i = 1; i <= 7; ++i) {
    if (i == c.focal) continue;
    s += "exogenous U" + std::to_string(i) + " : {yes, no} ~ bernoulli(yes: " + format_number(c.p) + ")\n";
  }
  std::string votes;
  for (int i = 1; i <= 7; ++i) {
    const std::string k = std::to_string(i);
    s += "endogenous A" + k + " : {yes, no} = " + (i == c.focal ? c.vote : "U" + k) + "\n";
    votes += (i > 1 ? ", A" : "A") + k + " = yes";
  }
  s += "endogenous Pass : {yes, no} = if count(" + votes + ") >= 4 then yes else no\n\n";
  for (int i = 1; i <= 7; ++i) s += "action A" + std::to_string(i) + " -> a" + std::to_string(i) + "\n";
  s += "\noutcome Pass = no\n\n";

  std::string shifts;
  for (int i = 1; i <= 7; ++i) {
    if (i == c.focal) continue;
    shifts += "  shift U" + std::to_string(i) + ".yes += n * " + format_number(c.eff) + "\n";
  }
  s += "option pressure(n in 1..7) {\n  cost = n * " + format_number(c.unit) + "\n" + shifts + "}\n";
  if (c.switch_cost) {
    s += "\noption pressured_switch(n in 0..7) {\n  requires a" + focal + "\n  cost = n * " +
         format_number(c.unit) + " + " + format_number(*c.switch_cost) + "\n" + shifts + "  set A" + focal +
         " = yes\n}\n";
  }
  return s;
}

std::string commons_source(const std::string& name, const std::string& cost) {
  std::string s = "# Eight fishermen share a stock that collapses if three or more overfish.\n";
  s += "scenario " + name + "\n";
  s += "agents f1, f2, f3, f4, f5, f6, f7, f8\n";
  s += "param N = 1000\n\n";
  std::string fish;
  std::string shifts;
  for (int i = 1; i <= 8; ++i) {
    const std::string k = std::to_string(i);
    s += "exogenous U" + k + " : {over, limit} ~ bernoulli(over: 0.9)\n";
    fish += (i > 1 ? ", F" : "F") + k + " = over";
    shifts += "  shift U" + k + ".limit += n * 0.1\n";
  }
  for (int i = 1; i <= 8; ++i) {
    const std::string k = std::to_string(i);
    s += "endogenous F" + k + " : {over, limit} = U" + k + "\n";
  }
  s += "endogenous Stock : {collapsed, healthy} = if count(" + fish + ") >= 3 then collapsed else healthy\n\n";
  for (int i = 1; i <= 8; ++i) s += "action F" + std::to_string(i) + " -> f" + std::to_string(i) + "\n";
  s += "\noutcome Stock = collapsed\n\n";
  s += "# n members jointly fund monitoring that fines overfishing.\n";
  s += "option fine(n in 1..8) {\n  cost = " + cost + "\n" + shifts + "}\n";
  return s;
}

const char* const kSingleAgentSource = R"(# One driver; every alternative to going on is its own option.
scenario single_agent_demo
agents d1
param N = 100
param baseline_cost = 0

exogenous Ice : {yes, no} ~ bernoulli(yes: 0.3)
endogenous Act : {go, brake, swerve} = go
endogenous Crash : {yes, no} = if Act = go then yes else if Act = brake and Ice = yes then yes else no
action Act -> d1

outcome Crash = yes

option brake {
  requires d1
  cost = 10
  set Act = brake
}

option swerve {
  requires d1
  cost = 60
  set Act = swerve
}
)";

Expectation near(std::string q, double v, double tol) { return {std::move(q), Expectation::Check::Near, v, tol, {}}; }
Expectation equals(std::string q, std::string text) {
  return {std::move(q), Expectation::Check::Equals, 0, 0, std::move(text)};
}

Builtin committee(const CommitteeSetup& c, const std::string& summary, double gb, const std::string& argmax,
                  double shapley, std::vector<Expectation> extra = {}) {
  const std::string focal = "a" + std::to_string(c.focal);
  Builtin b{"committee_" + focal, summary, committee_source(c), {}};
  b.expected.push_back(near("group_gb", gb, 0.001));
  if (!argmax.empty()) b.expected.push_back(equals("argmax", argmax));
  b.expected.push_back(near("shapley." + focal, shapley, 0.005));
  for (auto& e : extra) b.expected.push_back(std::move(e));
  return b;
}

std::vector<Builtin> make_builtins() {
  std::vector<Builtin> out;
  out.push_back(committee({1}, "a1 voted no; pressure costs 100 per head and adds 5% per head", 0.390,
                          "pressure(7)", 0.073, {near("delta_full", 0.453, 0.001)}));
  out.push_back(committee({2, "no", 0.6, 0.05, 100, 500}, "as a1, but switching costs 500", 0.390, "", 0.120));
  out.push_back(committee({3, "no", 0.6, 0.03}, "as a1, but pressure adds only 3% per head", 0.317, "", 0.079));
  out.push_back(committee({4, "no", 0.6, 0.05, 150}, "as a1, but pressure costs 150 per head", 0.361,
                          "pressure(6)", 0.068));
  out.push_back(committee({5, "no", 0.4}, "as a1, but each vote starts at 40% yes", 0.560, "", 0.125,
                          {near("delta_full", 0.651, 0.001)}));
  out.push_back(committee({6, "yes", 0.6, 0.05, 100, std::nullopt}, "as a1, but a6 voted yes", 0.157,
                          "pressure(6)", 0.022));

  Builtin coordinable{"commons_coordinable", "overfishing the commons when fines can be funded",
                      commons_source("commons_coordinable", "n * 10"), {}};
  coordinable.expected.push_back({"group_gb", Expectation::Check::AtLeast, 0.5, 0, {}});
  out.push_back(std::move(coordinable));

  Builtin blocked{"commons_blocked", "overfishing the commons when no coordination is possible",
                  commons_source("commons_blocked", "inf"), {}};
  blocked.expected.push_back(near("group_gb", 0, 0));
  for (int i = 1; i <= 8; ++i) blocked.expected.push_back(near("shapley.f" + std::to_string(i), 0, 0));
  out.push_back(std::move(blocked));

  // Brake: 0.7 drop at cost 10 of 100 gives 0.63; swerve gives 0.4.
  Builtin single{"single_agent_demo", "one agent; group blame reduces to single-agent blame", kSingleAgentSource,
                 {}};
  single.expected = {near("group_gb", 0.63, 1e-12), equals("argmax", "brake"), near("shapley.d1", 0.63, 1e-12)};
  out.push_back(std::move(single));
  return out;
}

}  // namespace

bool Expectation::accepts(double actual) const {
  switch (check) {
    case Check::Near: return std::abs(actual - value) <= tolerance;
    case Check::AtLeast: return actual >= value;
    case Check::Equals: return false;
  }
  return false;
}

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> registry = make_builtins();
  return registry;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& b : builtins()) names.push_back(b.name);
  return names;
}

const Builtin& find_builtin(const std::string& name) {
  for (const auto& b : builtins()) {
    if (b.name == name) return b;
  }
  std::string list;
  for (const auto& n : builtin_names()) list += (list.empty() ? "" : ", ") + n;
  throw UnknownScenario("no built-in scenario `" + name + "`; available: " + list);
}

blame::Scenario builtin(const std::string& name) {
  const Builtin& b = find_builtin(name);
  auto parsed = parse(b.source);
  if (!parsed.ok()) {
    std::string msg = "built-in `" + name + "` does not parse";
    for (const auto& d : parsed.diagnostics) msg += "\n" + format_diagnostic(d, name + ".blame");
    throw InvalidScenario(msg);
  }
  return std::move(*parsed.scenario);
}

}  // namespace groupblame::dsl
