#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "groupblame/causal/expr.hpp"
#include "groupblame/causal/formula.hpp"
#include "groupblame/causal/model.hpp"
#include "groupblame/epistemic/state.hpp"
#include "groupblame/source_span.hpp"

namespace groupblame::blame {

// Largest agent count a Coalition bitmask can hold.
inline constexpr std::size_t kMaxAgents = 63;

// Subset of a scenario's agents; bit i stands for the i-th agent.
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(std::uint64_t mask) : mask_(mask) {}

  static constexpr Coalition empty() { return Coalition(); }
  static constexpr Coalition full(std::size_t agents) {
    return Coalition(agents >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << agents) - 1);
  }
  static constexpr Coalition single(std::size_t agent) { return Coalition(std::uint64_t{1} << agent); }

  constexpr std::uint64_t mask() const { return mask_; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
  constexpr bool is_empty() const { return mask_ == 0; }
  constexpr bool contains(std::size_t agent) const { return (mask_ >> agent) & 1u; }
  constexpr bool subset_of(Coalition other) const { return (mask_ & ~other.mask_) == 0; }
  constexpr Coalition with(std::size_t agent) const { return Coalition(mask_ | (std::uint64_t{1} << agent)); }
  constexpr Coalition without(std::size_t agent) const {
    return Coalition(mask_ & ~(std::uint64_t{1} << agent));
  }
  constexpr Coalition operator-(Coalition other) const { return Coalition(mask_ & ~other.mask_); }

  constexpr auto operator<=>(const Coalition&) const = default;

 private:
  std::uint64_t mask_ = 0;
};

// Size parameter of an option template: instances n = lo..hi.
struct SizeParameter {
  std::string symbol = "n";
  int lo = 0;
  int hi = 0;

  bool operator==(const SizeParameter&) const = default;
};

// Adds `delta` to P(variable = value), clamped to [0, 1]; the other values
// are rescaled to keep the marginal normalized.
struct ShiftMarginal {
  std::string variable;
  std::string value;
  causal::Expr delta;

  bool operator==(const ShiftMarginal&) const = default;
};

// Replaces a marginal outright; values not listed get probability 0.
struct SetMarginal {
  std::string variable;
  std::vector<std::pair<std::string, causal::Expr>> distribution;

  bool operator==(const SetMarginal&) const = default;
};

// Fixes an action variable to a value in every setting.
struct SetAction {
  std::string variable;
  std::string value;

  bool operator==(const SetAction&) const = default;
};

using Effect = std::variant<ShiftMarginal, SetMarginal, SetAction>;

// A family of coordination options. Instance n is available to coalition S
// iff `required_agents` are in S and S has at least max(n, 1) acting
// members, where acting agents own an action variable. Members listed in
// `uncounted_agents` do not count toward n.
struct OptionTemplate {
  std::string name;
  std::optional<SizeParameter> size;
  std::vector<AgentId> required_agents;
  std::vector<AgentId> uncounted_agents;
  causal::Expr cost;  // may use the size symbol; `inf` marks impossible options
  std::vector<Effect> effects;

  std::vector<int> sizes() const;
  bool operator==(const OptionTemplate&) const = default;
};

// Full input to blame computation.
struct Scenario {
  std::string name;
  std::vector<AgentId> agents;
  epistemic::EpistemicState base_state;
  causal::OutcomeFormula outcome;
  std::vector<OptionTemplate> menu;
  // Cost of the status quo; may use `size`, the coalition's cardinality.
  causal::Expr baseline_cost;
  double balance = 0;
  // Whose beliefs and costs these are: an agent name or "society".
  std::string focal_epistemics = "society";

  std::optional<std::size_t> agent_index(const AgentId& agent) const;
  std::optional<std::size_t> agent_index(const std::string& name) const;

  // Agents compare as a set; everything else structurally.
  friend bool operator==(const Scenario& a, const Scenario& b);
};

// Problem found by `check_scenario`. `option` is the menu index when the
// problem belongs to a template.
struct ScenarioIssue {
  std::string code;
  std::string message;
  std::optional<std::size_t> option;
  SourceSpan span;
};

// Every invariant violation, including model findings and N <= max cost.
std::vector<ScenarioIssue> check_scenario(const Scenario& scenario);

// Cost of instance `n` of `option` (n ignored without a size parameter).
double instance_cost(const OptionTemplate& option, int n);

double baseline_cost(const Scenario& scenario, std::size_t coalition_size);

// E1 transformed by the effects of one option instance. Throws InvalidScenario.
epistemic::EpistemicState apply_effects(const epistemic::EpistemicState& state,
                                        const OptionTemplate& option, int n);

std::string instance_id(const OptionTemplate& option, int n);

}  // namespace groupblame::blame
