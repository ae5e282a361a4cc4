#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groupblame/blame/scenario.hpp"
#include "groupblame/epistemic/state.hpp"

namespace groupblame::blame {

// One alternative epistemic state E2 a coalition could bring about.
struct Candidate {
  std::string id;                     // "baseline" or an instance id such as "pressure(3)"
  std::optional<std::size_t> option;  // menu index; empty for the baseline
  int n = 0;
  double cost = 0;
  epistemic::EpistemicState state;
};

struct GroupBlame {
  double value = 0;
  std::string argmax = "baseline";
  double argmax_cost = 0;
};

struct EngineOptions {
  epistemic::QueryOptions query;
  // When set, outcome probabilities are Monte-Carlo estimates with this many
  // samples instead of exact enumeration.
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 0;
};

// Scenario prepared for repeated gb queries: every option instance is
// built and its outcome probability computed once. Thread-safe for
// concurrent const use.
class BlameEngine {
 public:
  // Throws InvalidScenario or BalanceTooSmall on the first issue found by
  // check_scenario.
  explicit BlameEngine(Scenario scenario, EngineOptions options = {});

  const Scenario& scenario() const { return scenario_; }
  std::size_t agent_count() const { return scenario_.agents.size(); }

  // Throws InvalidScenario for names that are not agents.
  Coalition coalition(const std::vector<std::string>& names) const;
  std::vector<AgentId> members(Coalition s) const;

  // Baseline first, then instances in menu order with n ascending.
  std::vector<Candidate> instantiate_menu(Coalition s) const;

  GroupBlame gb(Coalition s) const;
  double gb_relative(Coalition s, const Candidate& candidate) const;

  // Pr(phi) under the base state.
  double base_probability() const { return base_probability_; }

 private:
  struct Instance {
    std::size_t option;
    int n;
    double cost;
    std::uint64_t required;
    std::uint64_t counted;  // agents that count toward n
    epistemic::EpistemicState state;
    double probability;
  };

  bool available(const Instance& inst, Coalition s) const;
  double probability(const epistemic::EpistemicState& state, std::uint64_t stream) const;
  double relative(Coalition s, double probability, double cost) const;

  Scenario scenario_;
  EngineOptions options_;
  double base_probability_ = 0;
  std::uint64_t acting_ = 0;  // agents owning an action variable
  std::vector<Instance> instances_;
};

std::vector<Candidate> instantiate_menu(const Scenario& scenario, Coalition s);
GroupBlame gb(const Scenario& scenario, Coalition s);
double gb_relative(const Scenario& scenario, Coalition s, const Candidate& candidate);

// max(0, Pr1(phi) - Pr2(phi)) with null interventions.
double delta_group(const epistemic::EpistemicState& e1, const epistemic::EpistemicState& e2,
                   const causal::OutcomeFormula& phi, const epistemic::QueryOptions& options = {});

struct MonotonicityViolation {
  Coalition smaller;
  Coalition larger;
  double gb_smaller = 0;
  double gb_larger = 0;
};

struct MonotonicityReport {
  bool exhaustive = true;
  std::uint64_t pairs_checked = 0;
  std::uint64_t violation_count = 0;
  // At most kMaxListedViolations entries, ordered by (larger, smaller) mask.
  std::vector<MonotonicityViolation> violations;

  bool ok() const { return violation_count == 0; }
};

inline constexpr std::size_t kMaxListedViolations = 1000;
inline constexpr std::size_t kExhaustiveMonotonicityAgents = 15;
inline constexpr double kMonotonicityTolerance = 1e-9;

// Checks gb(S) <= gb(T) + 1e-9 for S ⊆ T: every pair up to 15 agents,
// `sampled_pairs` random pairs above.
MonotonicityReport validate_monotonicity(const BlameEngine& engine,
                                         std::uint64_t sampled_pairs = 20000,
                                         std::uint64_t seed = 1);
MonotonicityReport validate_monotonicity(const Scenario& scenario);

}  // namespace groupblame::blame
