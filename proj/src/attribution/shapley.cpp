#include "groupblame/attribution/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "groupblame/epistemic/rng.hpp"
#include "groupblame/error.hpp"

namespace groupblame::attribution {

namespace {

unsigned thread_count(unsigned requested, std::uint64_t work) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(n, std::max<std::uint64_t>(work, 1)));
}

// Runs body(worker) on `workers` threads and rethrows the first failure.
template <typename Body>
void run_parallel(unsigned workers, Body&& body) {
  if (workers <= 1) {
    body(0u);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        body(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void require_materializable(std::size_t agents) {
  if (agents > kMaxMaterializedAgents) {
    throw TooManyAgents(std::to_string(agents) + " agents is above the limit of " +
                        std::to_string(kMaxMaterializedAgents) +
                        " for exact attribution; use sampled attribution instead");
  }
}

}  // namespace

CoalitionGame::CoalitionGame(std::vector<AgentId> agents, std::vector<double> values)
    : agents_(std::move(agents)), values_(std::move(values)) {
  require_materializable(agents_.size());
  if (values_.size() != (std::size_t{1} << agents_.size())) {
    throw InvalidScenario("coalition game over " + std::to_string(agents_.size()) +
                          " agents needs " + std::to_string(std::size_t{1} << agents_.size()) +
                          " values");
  }
  if (values_[0] != 0.0) throw InvalidScenario("the empty coalition must have value 0");
}

std::optional<std::size_t> CoalitionGame::agent_index(const AgentId& agent) const {
  auto it = std::find(agents_.begin(), agents_.end(), agent);
  if (it == agents_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - agents_.begin());
}

CoalitionGame coalition_values(const blame::BlameEngine& engine, const GameOptions& options) {
  const std::size_t m = engine.agent_count();
  require_materializable(m);
  const std::uint64_t count = std::uint64_t{1} << m;
  std::vector<double> values(count);
  const unsigned workers = thread_count(options.threads, count);
  // Each worker owns a strided set of masks, so results do not depend on
  // the worker count.
  run_parallel(workers, [&](unsigned w) {
    for (std::uint64_t mask = w; mask < count; mask += workers) {
      values[mask] = engine.gb(Coalition(mask)).value;
    }
  });
  CoalitionGame game(engine.scenario().agents, std::move(values));
  return options.repair_monotonicity ? monotone_repair(game) : game;
}

CoalitionGame coalition_values(const blame::Scenario& scenario, const GameOptions& options) {
  require_materializable(scenario.agents.size());
  return coalition_values(blame::BlameEngine(scenario), options);
}

CoalitionGame monotone_repair(const CoalitionGame& game) {
  std::vector<double> v = game.values();
  const std::size_t m = game.agent_count();
  // Ascending masks: every S \ {j} is final before S.
  for (std::uint64_t mask = 1; mask < v.size(); ++mask) {
    for (std::size_t j = 0; j < m; ++j) {
      if ((mask >> j) & 1u) v[mask] = std::max(v[mask], v[mask & ~(std::uint64_t{1} << j)]);
    }
  }
  return CoalitionGame(game.agents(), std::move(v));
}

double marginal_contribution(const CoalitionGame& game, std::size_t j, Coalition s) {
  if (s.contains(j)) return game.value(s) - game.value(s.without(j));
  return game.value(s.with(j)) - game.value(s);
}

double shapley_weight(std::size_t coalition_size, std::size_t agents) {
  if (coalition_size == 0 || coalition_size > agents) return 0.0;
  const double s = static_cast<double>(coalition_size);
  const double m = static_cast<double>(agents);
  if (agents > 15) return std::exp(std::lgamma(s) + std::lgamma(m - s + 1) - std::lgamma(m + 1));
  // (s-1)! (m-s)! / m! = 1 / (s * C(m, s))
  double binom = 1;
  for (std::size_t i = 1; i <= coalition_size; ++i) {
    binom = binom * static_cast<double>(agents - coalition_size + i) / static_cast<double>(i);
  }
  return 1.0 / (s * binom);
}

double AttributionResult::value_of(const std::string& agent) const {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].name == agent) return values[i];
  }
  throw InvalidScenario("no attribution for `" + agent + "`");
}

namespace {

void finish(AttributionResult& r) {
  double sum = 0;
  for (double v : r.values) sum += v;
  r.efficiency_residual = std::abs(sum - r.group_value);
}

}  // namespace

AttributionResult shapley_exact(const CoalitionGame& game) {
  const std::size_t m = game.agent_count();
  std::vector<double> weight(m + 1);
  for (std::size_t s = 1; s <= m; ++s) weight[s] = shapley_weight(s, m);
  AttributionResult r;
  r.agents = game.agents();
  r.values.assign(m, 0.0);
  r.std_errors.assign(m, 0.0);
  r.method = Method::Exact;
  const auto& v = game.values();
  for (std::uint64_t mask = 1; mask < v.size(); ++mask) {
    const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
    for (std::size_t j = 0; j < m; ++j) {
      if ((mask >> j) & 1u) r.values[j] += w * (v[mask] - v[mask & ~(std::uint64_t{1} << j)]);
    }
  }
  r.group_value = game.value(game.grand());
  finish(r);
  return r;
}

namespace {

// gb memo shared by sampling workers. Concurrent inserts of one mask keep
// the first value; all writers compute the same number anyway.
class ValueCache {
 public:
  explicit ValueCache(const blame::BlameEngine& engine) : engine_(engine) {}

  double operator()(std::uint64_t mask) {
    if (mask == 0) return 0.0;
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(mask);
      if (it != cache_.end()) return it->second;
    }
    double v = engine_.gb(Coalition(mask)).value;
    std::lock_guard lock(mutex_);
    return cache_.try_emplace(mask, v).first->second;
  }

 private:
  const blame::BlameEngine& engine_;
  std::mutex mutex_;
  std::unordered_map<std::uint64_t, double> cache_;
};

// Permutations are summed in fixed-size chunks reduced in chunk order.
constexpr std::uint64_t kChunk = 1024;

struct ChunkSums {
  std::vector<double> sum;
  std::vector<double> sum_sq;
};

}  // namespace

AttributionResult shapley_sampled(const blame::BlameEngine& engine, std::uint64_t n_permutations,
                                  std::uint64_t seed, unsigned threads) {
  if (n_permutations == 0) throw InvalidSampleCount("need at least one permutation");
  const std::size_t m = engine.agent_count();
  ValueCache cache(engine);
  const std::uint64_t chunks = (n_permutations + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partial(chunks, ChunkSums{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)});
  const unsigned workers = thread_count(threads, chunks);

  run_parallel(workers, [&](unsigned w) {
    std::vector<std::size_t> order(m);
    for (std::uint64_t c = w; c < chunks; c += workers) {
      auto& out = partial[c];
      const std::uint64_t end = std::min(n_permutations, (c + 1) * kChunk);
      for (std::uint64_t t = c * kChunk; t < end; ++t) {
        epistemic::CounterRng rng(seed, t);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        std::uint64_t mask = 0;
        double prev = 0;
        for (std::size_t agent : order) {
          mask |= std::uint64_t{1} << agent;
          double cur = cache(mask);
          double contribution = cur - prev;
          out.sum[agent] += contribution;
          out.sum_sq[agent] += contribution * contribution;
          prev = cur;
        }
      }
    }
  });

  std::vector<double> sum(m, 0.0);
  std::vector<double> sum_sq(m, 0.0);
  for (const auto& p : partial) {
    for (std::size_t j = 0; j < m; ++j) {
      sum[j] += p.sum[j];
      sum_sq[j] += p.sum_sq[j];
    }
  }
  AttributionResult r;
  r.agents = engine.scenario().agents;
  r.method = Method::Sampled;
  r.n_permutations = n_permutations;
  r.seed = seed;
  const double n = static_cast<double>(n_permutations);
  for (std::size_t j = 0; j < m; ++j) {
    double mean = sum[j] / n;
    double var = n > 1 ? std::max(0.0, (sum_sq[j] - n * mean * mean) / (n - 1)) : 0.0;
    r.values.push_back(mean);
    r.std_errors.push_back(std::sqrt(var / n));
  }
  r.group_value = cache(Coalition::full(m).mask());
  finish(r);
  return r;
}

AttributionResult shapley_sampled(const blame::Scenario& scenario, std::uint64_t n_permutations,
                                  std::uint64_t seed) {
  return shapley_sampled(blame::BlameEngine(scenario), n_permutations, seed);
}

Permutation inverse(const Permutation& pi) {
  Permutation inv(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) inv[pi[i]] = i;
  return inv;
}

blame::Scenario permute_scenario(const blame::Scenario& scenario, const Permutation& pi) {
  const std::size_t m = scenario.agents.size();
  if (pi.size() != m) {
    throw NotABijection("permutation has " + std::to_string(pi.size()) + " entries for " +
                        std::to_string(m) + " agents");
  }
  std::vector<bool> hit(m, false);
  for (std::size_t image : pi) {
    if (image >= m || hit[image]) throw NotABijection("permutation is not a bijection on agents");
    hit[image] = true;
  }
  std::map<std::string, AgentId> image_of;
  for (std::size_t i = 0; i < m; ++i) image_of[scenario.agents[i].name] = scenario.agents[pi[i]];
  auto map_agent = [&](const AgentId& a) {
    auto it = image_of.find(a.name);
    return it == image_of.end() ? a : it->second;
  };

  blame::Scenario out = scenario;
  out.base_state = scenario.base_state.map_models([&](const causal::CausalModel& model) {
    auto agent_of = model.signature().agent_of;
    for (auto& [var, agent] : agent_of) agent = map_agent(agent);
    return model.with_agent_of(std::move(agent_of));
  });
  for (auto& opt : out.menu) {
    for (auto& a : opt.required_agents) a = map_agent(a);
    for (auto& a : opt.uncounted_agents) a = map_agent(a);
  }
  if (image_of.contains(out.focal_epistemics)) out.focal_epistemics = image_of[out.focal_epistemics].name;
  return out;
}

std::vector<Permutation> probe_permutations(std::size_t agents) {
  std::vector<Permutation> probes;
  if (agents < 2) return probes;
  Permutation id(agents);
  std::iota(id.begin(), id.end(), std::size_t{0});
  auto reversed = id;
  std::reverse(reversed.begin(), reversed.end());
  probes.push_back(reversed);
  auto rotated = id;
  std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  probes.push_back(rotated);
  auto swapped = id;
  std::swap(swapped[0], swapped[1]);
  probes.push_back(swapped);
  for (std::uint64_t k = 0; k < 3; ++k) {
    epistemic::CounterRng rng(0x5ca1ab1e, k);
    auto p = id;
    for (std::size_t i = agents; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    probes.push_back(p);
  }
  return probes;
}

bool AxiomReport::ok(double tolerance) const {
  return efficiency_residual <= tolerance && symmetry_deviation <= tolerance &&
         dummy_max_abs <= tolerance && (!monotone || nonnegative);
}

AxiomReport check_axioms(const blame::Scenario& scenario, const GameOptions& options) {
  const std::size_t m = scenario.agents.size();
  if (m > kMaxAxiomAgents) {
    throw TooManyAgents("axiom checks support at most " + std::to_string(kMaxAxiomAgents) +
                        " agents, got " + std::to_string(m));
  }
  AxiomReport report;
  blame::BlameEngine engine(scenario);
  auto game = coalition_values(engine, options);
  auto exact = shapley_exact(game);
  report.group_value = exact.group_value;
  report.efficiency_residual = exact.efficiency_residual;
  report.monotone = blame::validate_monotonicity(engine).ok();
  report.nonnegative = std::all_of(exact.values.begin(), exact.values.end(),
                                   [](double v) { return v >= -1e-12; });

  for (const auto& pi : probe_permutations(m)) {
    auto permuted = shapley_exact(coalition_values(permute_scenario(scenario, pi), options));
    for (std::size_t i = 0; i < m; ++i) {
      report.symmetry_deviation =
          std::max(report.symmetry_deviation, std::abs(permuted.values[pi[i]] - exact.values[i]));
    }
    ++report.probes;
  }

  for (std::size_t j = 0; j < m; ++j) {
    bool dummy = true;
    for (std::uint64_t mask = 0; mask < game.values().size() && dummy; ++mask) {
      if (std::abs(marginal_contribution(game, j, Coalition(mask))) > 1e-12) dummy = false;
    }
    if (dummy) {
      report.dummy_agents.push_back(game.agents()[j]);
      report.dummy_max_abs = std::max(report.dummy_max_abs, std::abs(exact.values[j]));
    }
  }
  return report;
}

PairwiseMonotonicity compare_contributions(const CoalitionGame& a, const CoalitionGame& b,
                                           std::size_t j) {
  if (a.agents() != b.agents()) {
    throw InvalidScenario("games to compare must have the same agents in the same order");
  }
  PairwiseMonotonicity out;
  out.premise = true;
  for (std::uint64_t mask = 0; mask < a.values().size() && out.premise; ++mask) {
    if (marginal_contribution(a, j, Coalition(mask)) < marginal_contribution(b, j, Coalition(mask)) - 1e-12) {
      out.premise = false;
    }
  }
  out.db_a = shapley_exact(a).values[j];
  out.db_b = shapley_exact(b).values[j];
  return out;
}

}  // namespace groupblame::attribution
