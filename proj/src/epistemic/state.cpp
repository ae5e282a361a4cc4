#include "groupblame/epistemic/state.hpp"

#include <algorithm>
#include <cmath>

#include "groupblame/epistemic/rng.hpp"
#include "groupblame/error.hpp"

namespace groupblame::epistemic {

namespace {

bool same_variables(const causal::Signature& a, const causal::Signature& b) {
  return a.exogenous == b.exogenous && a.endogenous == b.endogenous;
}

void require_valid_model(const causal::CausalModel& model) {
  if (!model.valid()) {
    throw InvalidState("state contains an ill-formed model: " +
                       model.report().findings.front().message);
  }
}

// Entries are kept as given; queries normalize by the enumerated mass, so a
// sum that is off by rounding never leaks into results.
void check_distribution(const std::string& variable, const std::vector<double>& probs,
                        std::size_t range_size) {
  if (probs.size() != range_size) {
    throw InvalidState("marginal for `" + variable + "` has " + std::to_string(probs.size()) +
                       " entries but the range has " + std::to_string(range_size));
  }
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidState("marginal for `" + variable + "` has an entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InvalidState("marginal for `" + variable + "` sums to " + causal::format_number(sum));
  }
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
  return a * b;
}

}  // namespace

EpistemicState EpistemicState::from_settings(std::vector<WeightedSetting> settings) {
  std::vector<WeightedSetting> kept;
  double sum = 0;
  for (auto& ws : settings) {
    if (!(ws.weight >= 0.0 && ws.weight <= 1.0)) {
      throw InvalidState("setting weight " + causal::format_number(ws.weight) +
                         " is outside [0, 1]");
    }
    require_valid_model(ws.setting.model());
    if (!kept.empty() && !same_variables(kept.front().setting.model().signature(),
                                         ws.setting.model().signature())) {
      throw InvalidState("settings of one epistemic state must share variables and ranges");
    }
    sum += ws.weight;
    if (ws.weight > 0) kept.push_back(std::move(ws));
  }
  if (kept.empty()) throw InvalidState("epistemic state has no setting with positive weight");
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw InvalidState("setting weights sum to " + causal::format_number(sum));
  }
  return EpistemicState(ExplicitState{std::move(kept)});
}

EpistemicState EpistemicState::factored(causal::CausalModel model, std::vector<Marginal> marginals) {
  require_valid_model(model);
  const auto& exo = model.signature().exogenous;
  std::vector<Marginal> ordered;
  for (const auto& var : exo) {
    auto it = std::find_if(marginals.begin(), marginals.end(),
                           [&](const Marginal& m) { return m.variable == var.name; });
    if (it == marginals.end()) {
      throw InvalidState("no marginal for exogenous variable `" + var.name + "`");
    }
    ordered.push_back(*it);
    check_distribution(var.name, ordered.back().probabilities, var.range.size());
  }
  if (marginals.size() != exo.size()) {
    for (const auto& m : marginals) {
      if (std::none_of(exo.begin(), exo.end(),
                       [&](const causal::Variable& v) { return v.name == m.variable; })) {
        throw InvalidState("marginal for `" + m.variable + "`, which is not exogenous");
      }
    }
    throw InvalidState("more than one marginal for an exogenous variable");
  }
  return EpistemicState(FactoredState{std::move(model), std::move(ordered)});
}

const causal::Signature& EpistemicState::signature() const {
  if (const auto* f = as_factored()) return f->model.signature();
  return as_explicit()->settings.front().setting.model().signature();
}

std::uint64_t EpistemicState::context_count() const {
  if (const auto* e = as_explicit()) return e->settings.size();
  std::uint64_t total = 1;
  for (const auto& m : as_factored()->marginals) {
    auto support = static_cast<std::uint64_t>(
        std::count_if(m.probabilities.begin(), m.probabilities.end(), [](double p) { return p > 0; }));
    total = saturating_mul(total, support);
  }
  return total;
}

EpistemicState EpistemicState::map_models(
    const std::function<causal::CausalModel(const causal::CausalModel&)>& transform) const {
  if (const auto* f = as_factored()) return factored(transform(f->model), f->marginals);
  std::vector<WeightedSetting> out;
  // Settings usually share one model; transform each distinct one once.
  std::vector<std::pair<causal::CausalModel, causal::CausalModel>> done;
  for (const auto& ws : as_explicit()->settings) {
    const auto& m = ws.setting.model();
    auto it = std::find_if(done.begin(), done.end(), [&](const auto& p) { return p.first == m; });
    if (it == done.end()) {
      done.emplace_back(m, transform(m));
      it = done.end() - 1;
    }
    out.push_back({causal::CausalSetting(it->second, ws.setting.context()), ws.weight});
  }
  return from_settings(std::move(out));
}

EpistemicState EpistemicState::with_marginal(const std::string& variable,
                                             std::vector<double> probabilities) const {
  const auto* f = as_factored();
  if (!f) throw InvalidState("marginals can only be changed on a factored state");
  auto marginals = f->marginals;
  auto it = std::find_if(marginals.begin(), marginals.end(),
                         [&](const Marginal& m) { return m.variable == variable; });
  if (it == marginals.end()) throw InvalidState("no exogenous variable `" + variable + "`");
  it->probabilities = std::move(probabilities);
  return factored(f->model, std::move(marginals));
}

namespace {

// Visits every positive-probability context of a factored state in
// mixed-radix order (first exogenous variable fastest).
template <typename Visit>
void for_each_context(const FactoredState& f, Visit&& visit) {
  const std::size_t k = f.marginals.size();
  std::vector<std::vector<std::size_t>> support(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t v = 0; v < f.marginals[i].probabilities.size(); ++v) {
      if (f.marginals[i].probabilities[v] > 0) support[i].push_back(v);
    }
  }
  std::vector<std::size_t> digit(k, 0);
  std::vector<std::size_t> context(k, 0);
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      context[i] = support[i][digit[i]];
      w *= f.marginals[i].probabilities[context[i]];
    }
    visit(std::as_const(context), w);
    std::size_t i = 0;
    for (; i < k; ++i) {
      if (++digit[i] < support[i].size()) break;
      digit[i] = 0;
    }
    if (i == k) return;
  }
}

void check_bound(const EpistemicState& state, const QueryOptions& options) {
  if (state.is_factored() && state.context_count() > options.exact_bound) {
    throw EnumerationBoundExceeded("state has " + std::to_string(state.context_count()) +
                                   " joint contexts, above the exact bound of " +
                                   std::to_string(options.exact_bound) + "; use sampling");
  }
}

}  // namespace

ProbabilityEstimate prob(const EpistemicState& state, const causal::Intervention& iv,
                         const causal::OutcomeFormula& phi, const QueryOptions& options) {
  check_bound(state, options);
  // Both masses are accumulated so that the result is normalized by the
  // enumerated total; this makes tautologies exactly 1.
  double hit = 0;
  double miss = 0;
  if (const auto* f = state.as_factored()) {
    causal::Evaluator ev(f->model, iv, phi);
    for_each_context(*f, [&](const std::vector<std::size_t>& context, double w) {
      (ev.holds(context) ? hit : miss) += w;
    });
  } else {
    std::optional<causal::Evaluator> ev;
    const causal::CausalModel* current = nullptr;
    for (const auto& ws : state.as_explicit()->settings) {
      const auto& m = ws.setting.model();
      if (!current || !(*current == m)) {
        ev.emplace(m, iv, phi);
        current = &m;
      }
      (ev->holds(ws.setting.context().values()) ? hit : miss) += ws.weight;
    }
  }
  double total = hit == 0 ? 0.0 : hit / (hit + miss);
  return ProbabilityEstimate{std::clamp(total, 0.0, 1.0), 0.0, 0, std::nullopt};
}

ProbabilityEstimate sample_prob(const EpistemicState& state, const causal::Intervention& iv,
                                const causal::OutcomeFormula& phi, std::uint64_t n,
                                std::uint64_t seed) {
  if (n == 0) throw InvalidSampleCount("sample count must be at least 1");
  CounterRng rng(seed);
  std::uint64_t hits = 0;
  if (const auto* f = state.as_factored()) {
    causal::Evaluator ev(f->model, iv, phi);
    std::vector<std::size_t> context(f->marginals.size());
    for (std::uint64_t s = 0; s < n; ++s) {
      for (std::size_t i = 0; i < context.size(); ++i) {
        const auto& probs = f->marginals[i].probabilities;
        double u = rng.uniform();
        std::size_t v = 0;
        double acc = probs[0];
        while (u >= acc && v + 1 < probs.size()) acc += probs[++v];
        // Never land on a zero-probability value through rounding.
        while (probs[v] == 0 && v > 0) --v;
        context[i] = v;
      }
      if (ev.holds(context)) ++hits;
    }
  } else {
    const auto& settings = state.as_explicit()->settings;
    std::vector<double> cumulative;
    double acc = 0;
    for (const auto& ws : settings) cumulative.push_back(acc += ws.weight);
    std::vector<std::optional<causal::Evaluator>> evaluators(settings.size());
    for (std::uint64_t s = 0; s < n; ++s) {
      double u = rng.uniform() * acc;
      auto idx = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      idx = std::min(idx, settings.size() - 1);
      auto& ev = evaluators[idx];
      if (!ev) ev.emplace(settings[idx].setting.model(), iv, phi);
      if (ev->holds(settings[idx].setting.context().values())) ++hits;
    }
  }
  double p = static_cast<double>(hits) / static_cast<double>(n);
  return ProbabilityEstimate{p, std::sqrt(p * (1 - p) / static_cast<double>(n)), n, seed};
}

EpistemicState expand(const EpistemicState& state, const QueryOptions& options) {
  const auto* f = state.as_factored();
  if (!f) return state;
  check_bound(state, options);
  std::vector<WeightedSetting> settings;
  for_each_context(*f, [&](const std::vector<std::size_t>& context, double w) {
    if (w > 0) settings.push_back({causal::CausalSetting(f->model, causal::Context(context)), w});
  });
  return EpistemicState::from_settings(std::move(settings));
}

}  // namespace groupblame::epistemic
