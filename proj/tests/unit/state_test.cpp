#include "groupblame/epistemic/state.hpp"

#include <gtest/gtest.h>

#include <random>

#include "groupblame/epistemic/rng.hpp"
#include "groupblame/error.hpp"
#include "support/binomial_oracle.hpp"
#include "support/committee_model.hpp"

namespace groupblame::epistemic {
namespace {

using causal::OutcomeFormula;
using groupblame::testing::committee_fail;
using groupblame::testing::committee_focal_model;

EpistemicState committee_state(double p_yes, int focal = 1, const std::string& vote = "no") {
  auto model = committee_focal_model(focal, vote);
  std::vector<Marginal> marginals;
  for (const auto& u : model.signature().exogenous) {
    marginals.push_back({u.name, {p_yes, 1 - p_yes}});
  }
  return EpistemicState::factored(model, marginals);
}

const OutcomeFormula kFail = OutcomeFormula::event("Pass", "no");
const OutcomeFormula kPass = OutcomeFormula::event("Pass", "yes");

TEST(ProbTest, CommitteeBaseFailure) {
  auto p = prob(committee_state(0.6), {}, kFail);
  EXPECT_NEAR(p.value, committee_fail(6, 0, 0.6), 1e-12);
  EXPECT_NEAR(p.value, 0.45568, 1e-9);
  EXPECT_EQ(p.std_error, 0.0);
  EXPECT_TRUE(p.exact());
}

TEST(ProbTest, TautologyIsCertain) {
  auto taut = OutcomeFormula::disjunction(kPass, OutcomeFormula::negation(kPass));
  EXPECT_DOUBLE_EQ(prob(committee_state(0.6), {}, taut).value, 1.0);
}

TEST(ProbTest, PressuredMarginalsRaisePassing) {
  double base = prob(committee_state(0.6), {}, kPass).value;
  double pressured = prob(committee_state(0.95), {}, kPass).value;
  EXPECT_NEAR(pressured, 1 - committee_fail(6, 0, 0.95), 1e-12);
  EXPECT_NEAR(pressured, 0.99777015625, 1e-9);
  EXPECT_NEAR(base, 0.54432, 1e-9);
  EXPECT_NEAR(pressured - base, 0.453, 5e-4);
}

TEST(ProbTest, InterventionOnFocalVote) {
  auto p = prob(committee_state(0.6), {{"A1", "yes"}}, kPass);
  EXPECT_NEAR(p.value, 1 - committee_fail(6, 1, 0.6), 1e-12);
  EXPECT_NEAR(p.value, 0.8208, 1e-12);
}

TEST(ProbTest, EnumerationBound) {
  QueryOptions tight;
  tight.exact_bound = 63;
  EXPECT_THROW(prob(committee_state(0.6), {}, kFail, tight), EnumerationBoundExceeded);
  EXPECT_THROW(expand(committee_state(0.6), tight), EnumerationBoundExceeded);
  // Point masses shrink the enumerated space.
  EXPECT_NO_THROW(prob(committee_state(1.0), {}, kFail, tight));
}

TEST(ExpandTest, CommitteeHas64Settings) {
  auto e = expand(committee_state(0.6));
  ASSERT_NE(e.as_explicit(), nullptr);
  EXPECT_EQ(e.as_explicit()->settings.size(), 64u);
  double sum = 0;
  for (const auto& ws : e.as_explicit()->settings) sum += ws.weight;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(ExpandTest, NoExogenousVariablesGivesOneSetting) {
  causal::Signature sig;
  sig.endogenous.push_back({"X", causal::VariableKind::Endogenous, {"on", "off"}});
  causal::CausalModel m(sig, {{"X", causal::Expr::identifier("on")}});
  auto f = EpistemicState::factored(m, {});
  auto e = expand(f);
  ASSERT_EQ(e.as_explicit()->settings.size(), 1u);
  EXPECT_EQ(e.as_explicit()->settings[0].weight, 1.0);
  EXPECT_EQ(prob(f, {}, OutcomeFormula::event("X", "on")).value, 1.0);
}

TEST(ExpandTest, PointMassMarginal) {
  auto model = committee_focal_model(1, "no");
  std::vector<Marginal> marginals;
  for (const auto& u : model.signature().exogenous) marginals.push_back({u.name, {0.5, 0.5}});
  marginals[0].probabilities = {0.0, 1.0};
  auto e = expand(EpistemicState::factored(model, marginals));
  EXPECT_EQ(e.as_explicit()->settings.size(), 32u);
  for (const auto& ws : e.as_explicit()->settings) EXPECT_EQ(ws.setting.context().values()[0], 1u);
}

TEST(StateTest, RejectsBadDistributions) {
  auto model = committee_focal_model(1, "no");
  std::vector<Marginal> marginals;
  for (const auto& u : model.signature().exogenous) marginals.push_back({u.name, {0.6, 0.4}});
  auto bad = marginals;
  bad[0].probabilities = {0.6, 0.5};
  EXPECT_THROW(EpistemicState::factored(model, bad), InvalidState);
  bad = marginals;
  bad.pop_back();
  EXPECT_THROW(EpistemicState::factored(model, bad), InvalidState);
  bad = marginals;
  bad[0].probabilities = {1.2, -0.2};
  EXPECT_THROW(EpistemicState::factored(model, bad), InvalidState);

  causal::CausalSetting s(model, causal::Context(std::vector<std::size_t>(6, 0)));
  EXPECT_THROW(EpistemicState::from_settings({{s, 0.5}, {s, 0.4}}), InvalidState);
  EXPECT_THROW(EpistemicState::from_settings({{s, 0.0}}), InvalidState);
  EXPECT_THROW(EpistemicState::from_settings({}), InvalidState);
}

TEST(StateTest, ZeroWeightSettingsAreDropped) {
  auto model = committee_focal_model(1, "no");
  causal::CausalSetting s(model, causal::Context(std::vector<std::size_t>(6, 0)));
  auto e = EpistemicState::from_settings({{s, 1.0}, {s, 0.0}});
  EXPECT_EQ(e.as_explicit()->settings.size(), 1u);
}

TEST(StateTest, ExplicitSettingsMustShareVariables) {
  causal::CausalSetting a(committee_focal_model(1, "no"),
                          causal::Context(std::vector<std::size_t>(6, 0)));
  causal::CausalSetting b(groupblame::testing::committee_model(),
                          causal::Context(std::vector<std::size_t>(7, 0)));
  EXPECT_THROW(EpistemicState::from_settings({{a, 0.5}, {b, 0.5}}), InvalidState);
}

TEST(SampleProbTest, WithinThreeStandardErrors) {
  auto est = sample_prob(committee_state(0.6), {}, kFail, 100000, 20240521);
  EXPECT_EQ(est.n_samples, 100000u);
  EXPECT_GT(est.std_error, 0);
  EXPECT_LE(std::abs(est.value - 0.45568), 3 * est.std_error);
}

TEST(SampleProbTest, DeterministicPerSeed) {
  auto a = sample_prob(committee_state(0.6), {}, kFail, 5000, 7);
  auto b = sample_prob(committee_state(0.6), {}, kFail, 5000, 7);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  auto c = sample_prob(committee_state(0.6), {}, kFail, 5000, 8);
  EXPECT_NE(a.value, c.value);
}

TEST(SampleProbTest, PointMassSingleSample) {
  auto est = sample_prob(committee_state(1.0), {}, kPass, 1, 3);
  EXPECT_EQ(est.value, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
  EXPECT_THROW(sample_prob(committee_state(1.0), {}, kPass, 0, 3), InvalidSampleCount);
}

TEST(SampleProbTest, ExplicitStates) {
  auto e = expand(committee_state(0.6));
  auto est = sample_prob(e, {}, kFail, 50000, 11);
  EXPECT_LE(std::abs(est.value - 0.45568), 3 * est.std_error);
}

TEST(CounterRngTest, StreamsAreReproducible) {
  CounterRng a(42, 3);
  CounterRng b(42, 3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(CounterRng(42, 3).next(), CounterRng(42, 4).next());
  EXPECT_EQ(CounterRng(42).split(5).next(), CounterRng(42).split(5).next());
  CounterRng r(1);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}

// Property checks over random product states on a small two-variable model.
class StatePropertyTest : public ::testing::TestWithParam<unsigned> {};

TEST_P(StatePropertyTest, Identities) {
  std::mt19937_64 rng(GetParam());
  std::uniform_real_distribution<double> unif(0, 1);
  double p = unif(rng);
  auto state = committee_state(p, 1 + static_cast<int>(rng() % 7), rng() % 2 ? "yes" : "no");
  causal::Intervention iv;
  if (rng() % 2) iv["A3"] = rng() % 2 ? "yes" : "no";
  const auto t = OutcomeFormula::truth();
  const auto f = OutcomeFormula::falsity();
  EXPECT_EQ(prob(state, iv, t).value, 1.0);
  EXPECT_EQ(prob(state, iv, f).value, 0.0);
  double a = prob(state, iv, kFail).value;
  EXPECT_NEAR(a + prob(state, iv, OutcomeFormula::negation(kFail)).value, 1.0, 1e-12);
  auto expanded = expand(state);
  EXPECT_NEAR(prob(expanded, iv, kFail).value, a, 1e-12);
  // phi and psi implies phi.
  auto both = OutcomeFormula::conjunction(kFail, OutcomeFormula::event("A2", "no"));
  EXPECT_LE(prob(state, iv, both).value, a + 1e-15);
}

INSTANTIATE_TEST_SUITE_P(RandomStates, StatePropertyTest, ::testing::Range(0u, 40u));

// Over a fixed seed suite, the sampled estimate lands within 3 stderr in at
// least 99% of cases, and doubling n shrinks stderr by about 1/sqrt(2).
TEST(SampleProbTest, ConsistencyOverSeedSuite) {
  auto state = committee_state(0.6);
  double exact = prob(state, {}, kFail).value;
  int inside = 0;
  const int kSeeds = 200;
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto est = sample_prob(state, {}, kFail, 2000, 1000 + seed);
    if (std::abs(est.value - exact) <= 3 * est.std_error) ++inside;
    auto twice = sample_prob(state, {}, kFail, 4000, 1000 + seed);
    double ratio = twice.std_error / est.std_error;
    EXPECT_GE(ratio, 0.6);
    EXPECT_LE(ratio, 0.85);
  }
  EXPECT_GE(inside, static_cast<int>(0.99 * kSeeds));
}

}  // namespace
}  // namespace groupblame::epistemic
