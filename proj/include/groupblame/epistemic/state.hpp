#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "groupblame/causal/model.hpp"

namespace groupblame::epistemic {

// Tolerance for probability vectors summing to 1.
inline constexpr double kProbabilityTolerance = 1e-9;

// Default cap on enumerated joint contexts for exact queries.
inline constexpr std::uint64_t kDefaultExactBound = std::uint64_t{1} << 22;

struct WeightedSetting {
  causal::CausalSetting setting;
  double weight = 0;

  bool operator==(const WeightedSetting&) const = default;
};

// Distribution of one exogenous variable; entries follow its range order.
struct Marginal {
  std::string variable;
  std::vector<double> probabilities;

  bool operator==(const Marginal&) const = default;
};

// Finite list of settings with probabilities.
struct ExplicitState {
  std::vector<WeightedSetting> settings;

  bool operator==(const ExplicitState&) const = default;
};

// One model with independent exogenous marginals, in the order of
// `Signature::exogenous`.
struct FactoredState {
  causal::CausalModel model;
  std::vector<Marginal> marginals;

  bool operator==(const FactoredState&) const = default;
};

// Probability distribution over causal settings. Immutable; construction
// validates and throws InvalidState.
class EpistemicState {
 public:
  // Zero-weight entries are dropped.
  static EpistemicState from_settings(std::vector<WeightedSetting> settings);
  // Marginals are matched to exogenous variables by name.
  static EpistemicState factored(causal::CausalModel model, std::vector<Marginal> marginals);

  bool is_factored() const { return std::holds_alternative<FactoredState>(rep_); }
  const FactoredState* as_factored() const { return std::get_if<FactoredState>(&rep_); }
  const ExplicitState* as_explicit() const { return std::get_if<ExplicitState>(&rep_); }

  // Variables shared by every setting; agent labels come from the first model.
  const causal::Signature& signature() const;

  // Number of joint contexts an exact query enumerates (saturating).
  std::uint64_t context_count() const;

  // Copy with every model replaced by `transform(model)`.
  EpistemicState map_models(const std::function<causal::CausalModel(const causal::CausalModel&)>&
                                transform) const;

  // Factored only: copy with one marginal replaced.
  EpistemicState with_marginal(const std::string& variable, std::vector<double> probabilities) const;

  bool operator==(const EpistemicState&) const = default;

 private:
  explicit EpistemicState(std::variant<ExplicitState, FactoredState> rep) : rep_(std::move(rep)) {}
  std::variant<ExplicitState, FactoredState> rep_;
};

struct ProbabilityEstimate {
  double value = 0;
  double std_error = 0;
  std::uint64_t n_samples = 0;
  std::optional<std::uint64_t> seed;

  bool exact() const { return n_samples == 0; }
};

struct QueryOptions {
  std::uint64_t exact_bound = kDefaultExactBound;
};

// Exact Pr([iv] phi). Throws EnumerationBoundExceeded for factored states
// whose context space exceeds the bound.
ProbabilityEstimate prob(const EpistemicState& state, const causal::Intervention& iv,
                         const causal::OutcomeFormula& phi, const QueryOptions& options = {});

// Monte-Carlo estimate from `n` settings drawn with `seed`.
ProbabilityEstimate sample_prob(const EpistemicState& state, const causal::Intervention& iv,
                                const causal::OutcomeFormula& phi, std::uint64_t n,
                                std::uint64_t seed);

// Enumerates a factored state; explicit states are returned unchanged.
EpistemicState expand(const EpistemicState& state, const QueryOptions& options = {});

}  // namespace groupblame::epistemic
