#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groupblame/blame/group.hpp"

namespace groupblame::attribution {

using blame::Coalition;

// Largest agent count whose full 2^M value table is materialized.
inline constexpr std::size_t kMaxMaterializedAgents = 20;

// Group blame viewed as a cooperative game, v(S) = gb(S), stored by mask.
class CoalitionGame {
 public:
  // `values` has 2^M entries; throws TooManyAgents above 20 agents and
  // InvalidScenario when the size is wrong or v(empty) != 0.
  CoalitionGame(std::vector<AgentId> agents, std::vector<double> values);

  const std::vector<AgentId>& agents() const { return agents_; }
  std::size_t agent_count() const { return agents_.size(); }
  double value(Coalition s) const { return values_[s.mask()]; }
  const std::vector<double>& values() const { return values_; }
  Coalition grand() const { return Coalition::full(agents_.size()); }
  std::optional<std::size_t> agent_index(const AgentId& agent) const;

 private:
  std::vector<AgentId> agents_;
  std::vector<double> values_;
};

struct GameOptions {
  unsigned threads = 0;  // 0: one per hardware thread
  // Replace v(S) by max over subsets S' of S, enforcing monotonicity.
  bool repair_monotonicity = false;
};

CoalitionGame coalition_values(const blame::BlameEngine& engine, const GameOptions& options = {});
CoalitionGame coalition_values(const blame::Scenario& scenario, const GameOptions& options = {});

// v*(S) = max over S' ⊆ S of v(S').
CoalitionGame monotone_repair(const CoalitionGame& game);

// v(S) - v(S \ {j}) if j is in S, otherwise v(S ∪ {j}) - v(S).
double marginal_contribution(const CoalitionGame& game, std::size_t j, Coalition s);

// (|S|-1)! (M-|S|)! / M!, in log space above 15 agents.
double shapley_weight(std::size_t coalition_size, std::size_t agents);

enum class Method { Exact, Sampled };

struct AttributionResult {
  std::vector<AgentId> agents;
  std::vector<double> values;
  std::vector<double> std_errors;  // zeros for exact results
  Method method = Method::Exact;
  std::uint64_t n_permutations = 0;
  std::optional<std::uint64_t> seed;
  double group_value = 0;
  double efficiency_residual = 0;  // |sum of values - v(Ag)|

  // Throws InvalidScenario for an unknown agent.
  double value_of(const std::string& agent) const;
};

AttributionResult shapley_exact(const CoalitionGame& game);

// Permutation-sampling estimate; gb is evaluated lazily and memoized.
// Deterministic for a given seed, whatever the thread count.
AttributionResult shapley_sampled(const blame::BlameEngine& engine, std::uint64_t n_permutations,
                                  std::uint64_t seed, unsigned threads = 1);
AttributionResult shapley_sampled(const blame::Scenario& scenario, std::uint64_t n_permutations,
                                  std::uint64_t seed);

// pi[i] is the image of agent index i.
using Permutation = std::vector<std::size_t>;

// Moves every action and option requirement of agent i to agent pi(i).
// Throws NotABijection.
blame::Scenario permute_scenario(const blame::Scenario& scenario, const Permutation& pi);

Permutation inverse(const Permutation& pi);

struct AxiomReport {
  double group_value = 0;
  double efficiency_residual = 0;
  double symmetry_deviation = 0;  // max over probe permutations and agents
  std::size_t probes = 0;
  std::vector<AgentId> dummy_agents;  // agents whose marginal contribution is always 0
  double dummy_max_abs = 0;           // largest |db| among them
  bool monotone = true;
  bool nonnegative = true;  // every db >= -1e-12

  bool ok(double tolerance = 1e-9) const;
};

inline constexpr std::size_t kMaxAxiomAgents = 12;

// Exact attribution plus permutation probes. Throws TooManyAgents above 12.
AxiomReport check_axioms(const blame::Scenario& scenario, const GameOptions& options = {});

// Fixed probe set: reversal, rotation, one swap and three seeded shuffles.
std::vector<Permutation> probe_permutations(std::size_t agents);

struct PairwiseMonotonicity {
  bool premise = false;  // mb_a(j, S) >= mb_b(j, S) for every S
  double db_a = 0;
  double db_b = 0;

  bool holds(double tolerance = 1e-12) const { return !premise || db_a >= db_b - tolerance; }
};

// Compares agent j's attribution across two games on the same agents.
PairwiseMonotonicity compare_contributions(const CoalitionGame& a, const CoalitionGame& b,
                                           std::size_t j);

}  // namespace groupblame::attribution
