#include "groupblame/blame/group.hpp"

#include <algorithm>
#include <cmath>

#include "groupblame/epistemic/rng.hpp"
#include "groupblame/error.hpp"

namespace groupblame::blame {

namespace {

std::uint64_t mask_of(const Scenario& s, const std::vector<AgentId>& agents) {
  std::uint64_t mask = 0;
  for (const auto& a : agents) mask |= std::uint64_t{1} << *s.agent_index(a);
  return mask;
}

}  // namespace

BlameEngine::BlameEngine(Scenario scenario, EngineOptions options)
    : scenario_(std::move(scenario)), options_(options) {
  auto issues = check_scenario(scenario_);
  if (!issues.empty()) {
    const auto& first = issues.front();
    if (first.code == "balance_too_small") throw BalanceTooSmall(first.message);
    throw InvalidScenario(first.message);
  }
  base_probability_ = probability(scenario_.base_state, 0);
  // Agents without an action variable cannot take part in any option.
  for (const auto& [var, agent] : scenario_.base_state.signature().agent_of) {
    acting_ |= std::uint64_t{1} << *scenario_.agent_index(agent);
  }
  for (std::size_t i = 0; i < scenario_.menu.size(); ++i) {
    const auto& opt = scenario_.menu[i];
    const std::uint64_t required = mask_of(scenario_, opt.required_agents);
    const std::uint64_t counted = acting_ & ~mask_of(scenario_, opt.uncounted_agents);
    for (int n : opt.sizes()) {
      double cost = instance_cost(opt, n);
      if (std::isinf(cost)) continue;
      auto state = apply_effects(scenario_.base_state, opt, n);
      double p = probability(state, instances_.size() + 1);
      instances_.push_back({i, n, cost, required, counted, std::move(state), p});
    }
  }
}

double BlameEngine::probability(const epistemic::EpistemicState& state, std::uint64_t stream) const {
  if (options_.samples) {
    std::uint64_t seed = epistemic::CounterRng(options_.seed, stream).next();
    return epistemic::sample_prob(state, {}, scenario_.outcome, *options_.samples, seed).value;
  }
  return epistemic::prob(state, {}, scenario_.outcome, options_.query).value;
}

Coalition BlameEngine::coalition(const std::vector<std::string>& names) const {
  Coalition s;
  for (const auto& name : names) {
    auto idx = scenario_.agent_index(name);
    if (!idx) throw InvalidScenario("`" + name + "` is not an agent of scenario " + scenario_.name);
    s = s.with(*idx);
  }
  return s;
}

std::vector<AgentId> BlameEngine::members(Coalition s) const {
  std::vector<AgentId> out;
  for (std::size_t i = 0; i < agent_count(); ++i) {
    if (s.contains(i)) out.push_back(scenario_.agents[i]);
  }
  return out;
}

bool BlameEngine::available(const Instance& inst, Coalition s) const {
  if ((s.mask() & acting_) == 0) return false;
  if ((inst.required & ~s.mask()) != 0) return false;
  return Coalition(s.mask() & inst.counted).size() >= static_cast<std::size_t>(inst.n);
}

std::vector<Candidate> BlameEngine::instantiate_menu(Coalition s) const {
  std::vector<Candidate> out;
  out.push_back({"baseline", std::nullopt, 0, baseline_cost(scenario_, s.size()), scenario_.base_state});
  for (const auto& inst : instances_) {
    if (!available(inst, s)) continue;
    out.push_back({instance_id(scenario_.menu[inst.option], inst.n), inst.option, inst.n, inst.cost,
                   inst.state});
  }
  return out;
}

double BlameEngine::relative(Coalition s, double p2, double cost) const {
  double delta = std::max(0.0, base_probability_ - p2);
  double extra = std::max(cost - baseline_cost(scenario_, s.size()), 0.0);
  return delta * (scenario_.balance - extra) / scenario_.balance;
}

GroupBlame BlameEngine::gb(Coalition s) const {
  GroupBlame best{0.0, "baseline", baseline_cost(scenario_, s.size())};
  const Instance* arg = nullptr;
  for (const auto& inst : instances_) {
    if (!available(inst, s)) continue;
    double v = relative(s, inst.probability, inst.cost);
    if (v > best.value) {
      best.value = v;
      best.argmax_cost = inst.cost;
      arg = &inst;
    }
  }
  if (arg) best.argmax = instance_id(scenario_.menu[arg->option], arg->n);
  return best;
}

double BlameEngine::gb_relative(Coalition s, const Candidate& candidate) const {
  if (std::isinf(candidate.cost)) {
    throw InvalidScenario("candidate " + candidate.id + " has infinite cost");
  }
  if (candidate.cost >= scenario_.balance) {
    throw BalanceTooSmall("candidate " + candidate.id + " costs " +
                          causal::format_number(candidate.cost) + ", not below N = " +
                          causal::format_number(scenario_.balance));
  }
  if (!candidate.option) return relative(s, base_probability_, candidate.cost);
  for (const auto& inst : instances_) {
    if (inst.option == *candidate.option && inst.n == candidate.n && inst.state == candidate.state) {
      return relative(s, inst.probability, candidate.cost);
    }
  }
  return relative(s, probability(candidate.state, 0), candidate.cost);
}

std::vector<Candidate> instantiate_menu(const Scenario& scenario, Coalition s) {
  return BlameEngine(scenario).instantiate_menu(s);
}

GroupBlame gb(const Scenario& scenario, Coalition s) { return BlameEngine(scenario).gb(s); }

double gb_relative(const Scenario& scenario, Coalition s, const Candidate& candidate) {
  return BlameEngine(scenario).gb_relative(s, candidate);
}

double delta_group(const epistemic::EpistemicState& e1, const epistemic::EpistemicState& e2,
                   const causal::OutcomeFormula& phi, const epistemic::QueryOptions& options) {
  double p1 = epistemic::prob(e1, {}, phi, options).value;
  double p2 = epistemic::prob(e2, {}, phi, options).value;
  return std::max(0.0, p1 - p2);
}

MonotonicityReport validate_monotonicity(const BlameEngine& engine, std::uint64_t sampled_pairs,
                                         std::uint64_t seed) {
  MonotonicityReport report;
  const std::size_t m = engine.agent_count();
  auto record = [&](Coalition small, Coalition large, double vs, double vl) {
    ++report.pairs_checked;
    if (vs > vl + kMonotonicityTolerance) {
      ++report.violation_count;
      if (report.violations.size() < kMaxListedViolations) {
        report.violations.push_back({small, large, vs, vl});
      }
    }
  };

  if (m <= kExhaustiveMonotonicityAgents) {
    const std::uint64_t count = std::uint64_t{1} << m;
    std::vector<double> value(count);
    for (std::uint64_t mask = 0; mask < count; ++mask) value[mask] = engine.gb(Coalition(mask)).value;
    for (std::uint64_t t = 1; t < count; ++t) {
      // Proper submasks of t, ascending.
      std::vector<std::uint64_t> subs;
      for (std::uint64_t s = (t - 1) & t;; s = (s - 1) & t) {
        subs.push_back(s);
        if (s == 0) break;
      }
      for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
        record(Coalition(*it), Coalition(t), value[*it], value[t]);
      }
    }
    return report;
  }

  report.exhaustive = false;
  epistemic::CounterRng rng(seed);
  const std::uint64_t all = Coalition::full(m).mask();
  for (std::uint64_t i = 0; i < sampled_pairs; ++i) {
    std::uint64_t t = rng.next() & all;
    std::uint64_t s = rng.next() & t;
    record(Coalition(s), Coalition(t), engine.gb(Coalition(s)).value, engine.gb(Coalition(t)).value);
  }
  return report;
}

MonotonicityReport validate_monotonicity(const Scenario& scenario) {
  return validate_monotonicity(BlameEngine(scenario));
}

}  // namespace groupblame::blame
