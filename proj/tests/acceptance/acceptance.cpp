// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status is 0 only when every criterion passes.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fuzz/parser_fuzz.hpp"
#include "groupblame/attribution/shapley.hpp"
#include "groupblame/blame/group.hpp"
#include "groupblame/blame/single.hpp"
#include "groupblame/dsl/builtins.hpp"
#include "groupblame/dsl/parser.hpp"
#include "groupblame/dsl/serialize.hpp"
#include "support/binomial_oracle.hpp"
#include "support/committee_scenario.hpp"
#include "support/error_corpus.hpp"
#include "support/random_scenarios.hpp"
#include "support/shapley_oracle.hpp"

namespace {

using namespace groupblame;
using attribution::CoalitionGame;
using blame::BlameEngine;
using blame::Coalition;

// Collects detail lines for the criterion being checked.
class Criterion {
 public:
  explicit Criterion(int id, std::string title) : id_(id), title_(std::move(title)) {}

  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    ok_ = ok_ && ok;
    lines_.push_back(std::string(ok ? "    ok   " : "    MISS ") + buf);
  }
  void note(const std::string& text) { lines_.push_back("    " + text); }

  bool finish() const {
    std::printf("%s %2d  %s\n", ok_ ? "PASS" : "FAIL", id_, title_.c_str());
    for (const auto& l : lines_) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
    return ok_;
  }

 private:
  int id_;
  std::string title_;
  bool ok_ = true;
  std::vector<std::string> lines_;
};

struct GroupResult {
  blame::GroupBlame gb;
  double delta = 0;
};

GroupResult full_group(const blame::Scenario& s) {
  BlameEngine engine(s);
  const auto full = Coalition::full(s.agents.size());
  GroupResult r{engine.gb(full), 0};
  for (const auto& c : engine.instantiate_menu(full)) {
    if (c.id == r.gb.argmax && c.option) r.delta = blame::delta_group(s.base_state, c.state, s.outcome);
  }
  return r;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Criteria 1 to 5 share one shape: a built-in, its reference value and
// optionally the expected argmax.
bool committee_value(int id, const char* name, double expected, const char* argmax, int focal) {
  Criterion c(id, std::string(name) + ": group gb");
  auto r = full_group(dsl::builtin(name));
  const double oracle = testing::committee_gb_oracle(testing::committee_params(focal),
                                                     Coalition::full(7).mask());
  c.check(near(r.gb.value, expected, 1e-3), "gb(Ag) = %.7f, expected %.3f +- 0.001", r.gb.value, expected);
  c.check(near(r.gb.value, oracle, 1e-12), "binomial oracle gb(Ag) = %.7f", oracle);
  if (argmax) c.check(r.gb.argmax == argmax, "argmax %s, expected %s", r.gb.argmax.c_str(), argmax);
  if (id == 4) {
    auto a1 = full_group(dsl::builtin("committee_a1"));
    c.check(near(a1.delta, 0.453, 1e-3), "committee_a1 pass-probability increase %.7f, expected 0.453 +- 0.001",
            a1.delta);
    c.check(near(r.delta, 0.651, 1e-3), "committee_a5 pass-probability increase %.7f, expected 0.651 +- 0.001",
            r.delta);
    const double base5 = testing::committee_fail(6, 0, 0.4);
    const double after5 = testing::committee_fail(6, 0, 0.75);
    c.check(near(r.delta, base5 - after5, 1e-12), "binomial oracle increase %.7f", base5 - after5);
  }
  return c.finish();
}

bool shapley_values() {
  Criterion c(6, "Shapley value of each focal agent");
  const double expected[] = {0.073, 0.120, 0.079, 0.068, 0.125, 0.022};
  for (int k = 1; k <= 6; ++k) {
    const std::string name = "committee_a" + std::to_string(k);
    auto game = attribution::coalition_values(dsl::builtin(name));
    double v = attribution::shapley_exact(game).value_of("a" + std::to_string(k));
    c.check(near(v, expected[k - 1], 5e-3), "%s: db(a%d) = %.5f, expected %.3f +- 0.005", name.c_str(), k, v,
            expected[k - 1]);
  }

  // The menu-interpretation report is printed on every run.
  c.note("menu interpretation report (switch-only, focal counts toward n):");
  for (bool switch_only : {true, false}) {
    for (bool focal_counts : {true, false}) {
      std::string row;
      bool all = true;
      for (int k = 1; k <= 6; ++k) {
        auto p = testing::committee_params(k);
        p.switch_only = switch_only;
        p.focal_counts = focal_counts;
        auto game = attribution::coalition_values(testing::committee_scenario(p));
        double v = attribution::shapley_exact(game).value_of("a" + std::to_string(k));
        all = all && near(v, expected[k - 1], 5e-3);
        char cell[32];
        std::snprintf(cell, sizeof cell, " %.5f", v);
        row += cell;
      }
      char head[96];
      std::snprintf(head, sizeof head, "  switch_only=%-3s focal_counts=%-3s %s:", switch_only ? "on" : "off",
                    focal_counts ? "on" : "off", all ? "hits all six" : "misses");
      c.note(head + row);
    }
  }
  return c.finish();
}

bool oracle_probabilities() {
  Criterion c(7, "committee_a1 outcome probabilities");
  BlameEngine engine(dsl::builtin("committee_a1"));
  const double base = engine.base_probability();
  const double base_oracle = testing::committee_fail(6, 0, 0.6);
  c.check(near(base, 0.45568, 1e-9), "P(Pass=no) base = %.11f, expected 0.45568 +- 1e-9", base);
  c.check(near(base, base_oracle, 1e-12), "binomial oracle %.11f", base_oracle);
  double pressured = -1;
  for (const auto& cand : engine.instantiate_menu(Coalition::full(7))) {
    if (cand.id == "pressure(7)") {
      pressured = epistemic::prob(cand.state, {}, engine.scenario().outcome).value;
    }
  }
  const double oracle = testing::committee_fail(6, 0, 0.95);
  c.check(near(pressured, oracle, 1e-12), "P(Pass=no) under pressure(7) = %.8f, binomial oracle %.8f",
          pressured, oracle);
  c.check(near(pressured, 0.00222984, 1e-5), "frozen oracle value 0.00222984 +- 1e-5");
  c.note("stated literal 0.00230 differs from P(Bin(6, 0.95) <= 3) by 7.0e-5; the oracle value is frozen");
  return c.finish();
}

bool efficiency() {
  Criterion c(8, "efficiency on built-ins and 200 random scenarios");
  double worst = 0;
  for (const auto& name : dsl::builtin_names()) {
    auto r = attribution::shapley_exact(attribution::coalition_values(dsl::builtin(name)));
    worst = std::max(worst, r.efficiency_residual);
    c.check(r.efficiency_residual <= 1e-9, "%s residual %.2e", name.c_str(), r.efficiency_residual);
  }
  std::size_t bad = 0;
  double worst_random = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto r = attribution::shapley_exact(attribution::coalition_values(testing::random_group_scenario(seed)));
    double sum = std::accumulate(r.values.begin(), r.values.end(), 0.0);
    double residual = std::fabs(sum - r.group_value);
    worst_random = std::max(worst_random, residual);
    if (residual > 1e-9) ++bad;
  }
  c.check(bad == 0, "200 random scenarios: %zu over 1e-9, largest residual %.2e", bad, worst_random);
  return c.finish();
}

bool nonnegativity() {
  Criterion c(9, "non-negativity on monotone random scenarios");
  std::size_t monotone = 0, bad = 0;
  double lowest = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto s = testing::random_group_scenario(seed);
    BlameEngine engine(s);
    if (!blame::validate_monotonicity(engine).ok()) continue;
    ++monotone;
    auto r = attribution::shapley_exact(attribution::coalition_values(engine));
    double low = *std::min_element(r.values.begin(), r.values.end());
    lowest = std::min(lowest, low);
    if (low < -1e-12) ++bad;
  }
  c.check(monotone > 0, "%zu of 200 random scenarios are monotone", monotone);
  c.check(bad == 0, "%zu with some db < -1e-12, lowest db %.3e", bad, lowest);
  return c.finish();
}

bool symmetry() {
  Criterion c(10, "symmetry under 20 random permutations of committee_a1");
  auto s = dsl::builtin("committee_a1");
  auto base = attribution::shapley_exact(attribution::coalition_values(s));
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    attribution::Permutation pi(7);
    std::iota(pi.begin(), pi.end(), std::size_t{0});
    std::shuffle(pi.begin(), pi.end(), rng);
    auto moved = attribution::shapley_exact(attribution::coalition_values(attribution::permute_scenario(s, pi)));
    for (std::size_t i = 0; i < 7; ++i) {
      worst = std::max(worst, std::fabs(moved.value_of(base.agents[pi[i]].name) - base.values[i]));
    }
  }
  c.check(worst <= 1e-9, "largest deviation %.2e", worst);
  return c.finish();
}

bool single_agent_reduction() {
  Criterion c(11, "group of one reduces to single-agent blame");
  double worst = 0;
  std::size_t positive = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto k = testing::random_single_agent(seed);
    auto game = attribution::coalition_values(k.scenario);
    double db = attribution::shapley_exact(game).values[0];
    double hk = blame::db_single_max(k.state, k.costs, k.balance, "A", k.actual,
                                     causal::OutcomeFormula::event("O", "yes"))
                    .value;
    worst = std::max(worst, std::fabs(db - hk));
    if (hk > 0) ++positive;
  }
  c.check(worst <= 1e-12, "100 scenarios, largest |db - db_single_max| %.2e (%zu with positive blame)", worst,
          positive);
  return c.finish();
}

bool shapley_oracle() {
  Criterion c(12, "closed form against all orderings, and permutation sampling");
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto game = attribution::coalition_values(testing::random_group_scenario(1000 + seed, 5));
    auto closed = attribution::shapley_exact(game);
    auto brute = testing::shapley_by_orderings(game.agent_count(),
                                               [&](std::uint64_t m) { return game.value(Coalition(m)); });
    for (std::size_t i = 0; i < brute.size(); ++i) worst = std::max(worst, std::fabs(closed.values[i] - brute[i]));
  }
  c.check(worst <= 1e-12, "50 random games with M <= 5: largest difference %.2e", worst);

  std::size_t agents = 0, outside = 0;
  auto sampled_case = [&](const blame::Scenario& s, const std::string& label) {
    BlameEngine engine(s);
    auto exact = attribution::shapley_exact(attribution::coalition_values(engine));
    auto est = attribution::shapley_sampled(engine, 50000, 7, 1);
    double worst_z = 0;
    for (std::size_t i = 0; i < exact.values.size(); ++i) {
      ++agents;
      double err = std::fabs(est.values[i] - exact.values[i]);
      if (err > 3 * est.std_errors[i] + 1e-12) ++outside;
      if (est.std_errors[i] > 0) worst_z = std::max(worst_z, err / est.std_errors[i]);
    }
    c.note(label + ": largest |sampled - exact| / stderr = " + std::to_string(worst_z));
  };
  std::size_t picked = 0;
  for (std::uint64_t seed = 2000; picked < 5; ++seed) {
    auto s = testing::random_group_scenario(seed, 5);
    if (s.agents.size() < 4 || blame::gb(s, Coalition::full(s.agents.size())).value == 0) continue;
    ++picked;
    sampled_case(s, s.name + " (M = " + std::to_string(s.agents.size()) + ")");
  }
  sampled_case(dsl::builtin("committee_a1"), "committee_a1 (M = 7)");
  c.check(outside == 0, "n = 50000, seed 7: %zu of %zu agents outside 3 stderr", outside, agents);
  return c.finish();
}

bool commons() {
  Criterion c(13, "commons");
  auto blocked = dsl::builtin("commons_blocked");
  auto game = attribution::coalition_values(blocked);
  double largest = *std::max_element(game.values().begin(), game.values().end());
  c.check(largest == 0, "commons_blocked: largest gb over %zu coalitions = %g", game.values().size(), largest);
  auto db = attribution::shapley_exact(game);
  double largest_db = 0;
  for (double v : db.values) largest_db = std::max(largest_db, std::fabs(v));
  c.check(largest_db == 0, "commons_blocked: largest |db| over fishermen = %g", largest_db);
  auto coordinable = full_group(dsl::builtin("commons_coordinable"));
  c.check(coordinable.gb.value >= 0.5, "commons_coordinable: gb(Ag) = %.6f via %s, expected >= 0.5",
          coordinable.gb.value, coordinable.gb.argmax.c_str());
  return c.finish();
}

bool parser() {
  Criterion c(14, "parser round trip, error corpus and fuzz");
  // Scenario to text to scenario is the identity, the canonical text is a
  // fixed point, and it matches the shipped scenarios/ file.
  std::size_t identical = 0;
  for (const auto& name : dsl::builtin_names()) {
    auto s = dsl::builtin(name);
    const std::string text = dsl::serialize(s);
    auto back = dsl::parse(text);
    std::ifstream in(std::string(GROUPBLAME_SOURCE_DIR) + "/scenarios/" + name + ".blame", std::ios::binary);
    std::stringstream shipped;
    shipped << in.rdbuf();
    bool ok = back.ok() && *back.scenario == s && dsl::serialize(*back.scenario) == text && shipped.str() == text;
    if (ok) ++identical;
    else c.check(false, "%s does not round-trip", name.c_str());
  }
  c.check(identical == dsl::builtins().size(), "%zu of %zu built-ins round-trip exactly", identical,
          dsl::builtins().size());

  auto corpus = testing::load_corpus(GROUPBLAME_ERROR_CORPUS);
  std::size_t matched = 0;
  for (const auto& k : corpus) {
    auto r = dsl::parse(k.source);
    const dsl::Diagnostic* first = nullptr;
    for (const auto& d : r.diagnostics) {
      if (d.severity == dsl::Severity::Error) {
        first = &d;
        break;
      }
    }
    bool ok = !r.ok() && first && first->code == k.code && first->span.line == k.line &&
              first->span.column == k.column && first->span.length == k.length;
    if (ok) ++matched;
    else c.check(false, "%s: expected %s at %zu:%zu+%zu", k.file.c_str(), k.code.c_str(), k.line, k.column, k.length);
  }
  c.check(corpus.size() == 30 && matched == 30, "error corpus: %zu of %zu files give the expected code and span",
          matched, corpus.size());

  const double seconds = fuzz::fuzz_seconds(600);
  auto stats = fuzz::run_parser_fuzz(seconds, 42, GROUPBLAME_ERROR_CORPUS);
  c.check(stats.ok(), "fuzz %.0f s, seed 42: %llu inputs, %llu parsed, %zu failures", seconds,
          static_cast<unsigned long long>(stats.inputs), static_cast<unsigned long long>(stats.parsed),
          stats.failures.size());
  for (std::size_t i = 0; i < stats.failures.size() && i < 3; ++i) c.note(stats.failures[i]);
  return c.finish();
}

}  // namespace

int main() {
  std::vector<std::function<bool()>> criteria{
      [] { return committee_value(1, "committee_a1", 0.390, "pressure(7)", 1); },
      [] { return committee_value(2, "committee_a3", 0.317, nullptr, 3); },
      [] { return committee_value(3, "committee_a4", 0.361, "pressure(6)", 4); },
      [] { return committee_value(4, "committee_a5", 0.560, nullptr, 5); },
      [] { return committee_value(5, "committee_a6", 0.157, "pressure(6)", 6); },
      shapley_values,
      oracle_probabilities,
      efficiency,
      nonnegativity,
      symmetry,
      single_agent_reduction,
      shapley_oracle,
      commons,
      parser,
  };
  int failed = 0;
  for (const auto& run : criteria) {
    bool ok = false;
    try {
      ok = run();
    } catch (const std::exception& e) {
      std::printf("FAIL     exception: %s\n", e.what());
    }
    if (!ok) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
