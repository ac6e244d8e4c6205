#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "advise/q_learning.hpp"
#include "advise/random.hpp"
#include "advise/state.hpp"
#include "support/chain.hpp"

using advise::Action;
using advise::ActionProbabilities;
using advise::QTable;
using advise::RandomStream;
using advise::RlHyperParams;
using advise::State;

namespace {

constexpr Action kLow = Action::LowFeatures;
constexpr Action kHigh = Action::HighFeatures;

State random_state(RandomStream& rng) {
  return State{static_cast<std::int32_t>(rng.below(21)), static_cast<std::int32_t>(rng.below(101)),
               static_cast<std::int32_t>(rng.below(20))};
}

double random_value(RandomStream& rng, double scale) { return (2.0 * rng.uniform() - 1.0) * scale; }

}  // namespace

TEST(QUpdate, ZeroRewardOnZeroTableIsFixedPoint) {
  QTable<State> q;
  const State s{0, 0, 1};
  const State s2{1, 0, 1};
  advise::q_update(q, s, kLow, 0.0, s2, false, RlHyperParams{});
  EXPECT_EQ(q.value(s, kLow), 0.0);
  EXPECT_EQ(q.value(s, kHigh), 0.0);
  EXPECT_EQ(q.value(s2, kLow), 0.0);
}

TEST(QUpdate, TerminalStepArithmetic) {
  QTable<State> q;
  const State s{19, 9, 3};
  RlHyperParams hp;
  hp.alpha = 0.1;
  q.set(State{20, 10, 3}, kLow, 50.0);  // ignored: terminal transitions do not bootstrap
  advise::q_update(q, s, kHigh, -1.0, State{20, 10, 3}, true, hp);
  EXPECT_DOUBLE_EQ(q.value(s, kHigh), -0.1);
}

TEST(QUpdate, BootstrapsFromBestNextAction) {
  QTable<int> q;
  q.set(1, kLow, 2.0);
  q.set(1, kHigh, 4.0);
  RlHyperParams hp{0.5, 0.5, 0.1};
  advise::q_update(q, 0, kLow, 1.0, 1, false, hp);
  EXPECT_DOUBLE_EQ(q.value(0, kLow), 0.5 * (1.0 + 0.5 * 4.0));
}

TEST(QUpdate, OnlyTouchesTheUpdatedPair) {
  RandomStream rng(7, "test.q_update");
  for (int trial = 0; trial < 200; ++trial) {
    QTable<State> q;
    std::vector<State> states;
    for (int k = 0; k < 8; ++k) {
      states.push_back(random_state(rng));
      for (const Action a : advise::kAllActions) q.set(states.back(), a, random_value(rng, 10.0));
    }
    const QTable<State> before = q;
    const State& s = states[rng.below(states.size())];
    const State& s2 = states[rng.below(states.size())];
    const Action a = rng.bernoulli(0.5) ? kLow : kHigh;
    advise::q_update(q, s, a, random_value(rng, 5.0), s2, rng.bernoulli(0.3), RlHyperParams{});
    for (const State& t : states) {
      for (const Action b : advise::kAllActions) {
        if (t == s && b == a) continue;
        EXPECT_EQ(q.value(t, b), before.value(t, b));
      }
    }
  }
}

TEST(QUpdate, RejectsBadInput) {
  QTable<int> q;
  EXPECT_THROW(advise::q_update(q, 0, kLow, NAN, 1, false, RlHyperParams{}), advise::InvalidArgument);
  EXPECT_THROW(advise::q_update(q, 0, kLow, 0.0, 1, false, RlHyperParams{1.5, 0.1, 0.1}),
               advise::InvalidArgument);
  EXPECT_THROW(advise::q_update(q, 0, kLow, 0.0, 1, false, RlHyperParams{0.9, 0.0, 0.1}),
               advise::InvalidArgument);
  EXPECT_THROW(q.set(0, kLow, INFINITY), advise::InvalidArgument);
}

TEST(QTable, UnseenPairsReadInitialValue) {
  QTable<State> zero;
  EXPECT_EQ(zero.value(State{}, kHigh), 0.0);
  QTable<State> pessimistic(-9.26);
  EXPECT_EQ(pessimistic.value(State{3, 4, 5}, kLow), -9.26);
  pessimistic.set(State{3, 4, 5}, kLow, 1.0);
  EXPECT_EQ(pessimistic.value(State{3, 4, 5}, kHigh), -9.26);
  EXPECT_EQ(pessimistic.size(), 1u);
}

TEST(QTable, GreedyBreaksTiesTowardLowFeatures) {
  QTable<int> q;
  EXPECT_EQ(q.greedy(0), kLow);
  q.set(0, kHigh, 1e-12);
  EXPECT_EQ(q.greedy(0), kHigh);
}

TEST(Boltzmann, EqualValuesGiveUniform) {
  QTable<State> q;
  q.set(State{}, kLow, 3.0);
  q.set(State{}, kHigh, 3.0);
  const auto p = advise::boltzmann_policy(q, State{}, 0.1);
  EXPECT_EQ(p[kLow], 0.5);
  EXPECT_EQ(p[kHigh], 0.5);
}

TEST(Boltzmann, HandEvaluatedSoftmax) {
  QTable<State> q;
  q.set(State{}, kLow, 1.0);
  q.set(State{}, kHigh, 0.0);
  const auto p = advise::boltzmann_policy(q, State{}, 0.1);
  EXPECT_NEAR(p[kLow], 1.0 / (1.0 + std::exp(-10.0)), 1e-12);
  EXPECT_NEAR(p[kLow], 0.9999546, 1e-7);
  EXPECT_NEAR(p[kLow] + p[kHigh], 1.0, 1e-15);
}

TEST(Boltzmann, InfiniteTemperatureLimit) {
  RandomStream rng(3, "test.tau");
  for (int k = 0; k < 100; ++k) {
    const advise::PerAction<double> q{{random_value(rng, 100.0), random_value(rng, 100.0)}};
    const auto p = advise::boltzmann_from_values(q, 1e9);
    EXPECT_NEAR(p[kLow], 0.5, 1e-6);
    EXPECT_NEAR(p[kHigh], 0.5, 1e-6);
  }
}

TEST(Boltzmann, ValidDistributionForLargeMagnitudes) {
  RandomStream rng(11, "test.magnitude");
  for (int k = 0; k < 2000; ++k) {
    const double scale = std::pow(10.0, 6.0 * rng.uniform());
    const advise::PerAction<double> q{{random_value(rng, scale), random_value(rng, scale)}};
    const double tau = std::pow(10.0, 4.0 * rng.uniform() - 3.0);
    const auto p = advise::boltzmann_from_values(q, tau);
    for (const Action a : advise::kAllActions) {
      ASSERT_TRUE(std::isfinite(p[a]));
      ASSERT_GE(p[a], 0.0);
    }
    ASSERT_NEAR(p[kLow] + p[kHigh], 1.0, 1e-9);
  }
  const auto extreme = advise::boltzmann_from_values({{1e6, -1e6}}, 0.1);
  EXPECT_EQ(extreme[kLow], 1.0);
  EXPECT_EQ(extreme[kHigh], 0.0);
}

TEST(Boltzmann, ShiftInvariance) {
  RandomStream rng(5, "test.shift");
  for (int k = 0; k < 1000; ++k) {
    const advise::PerAction<double> q{{random_value(rng, 50.0), random_value(rng, 50.0)}};
    const double c = random_value(rng, 1e3);
    const double tau = 0.05 + rng.uniform();
    const auto p = advise::boltzmann_from_values(q, tau);
    const auto shifted = advise::boltzmann_from_values({{q[kLow] + c, q[kHigh] + c}}, tau);
    EXPECT_NEAR(p[kLow], shifted[kLow], 1e-9);
    EXPECT_NEAR(p[kHigh], shifted[kHigh], 1e-9);
  }
}

TEST(Boltzmann, RejectsBadTemperature) {
  EXPECT_THROW(advise::boltzmann_from_values({{0.0, 0.0}}, 0.0), advise::InvalidArgument);
  EXPECT_THROW(advise::boltzmann_from_values({{0.0, 0.0}}, -1.0), advise::InvalidArgument);
  EXPECT_THROW(advise::boltzmann_from_values({{0.0, 0.0}}, INFINITY), advise::InvalidArgument);
}

TEST(SelectAction, DegenerateDistribution) {
  RandomStream rng(1, "test.degenerate");
  for (int k = 0; k < 10000; ++k) EXPECT_EQ(advise::select_action({{1.0, 0.0}}, rng), kLow);
  for (int k = 0; k < 10000; ++k) EXPECT_EQ(advise::select_action({{0.0, 1.0}}, rng), kHigh);
}

TEST(SelectAction, FairCoinWithinBinomialBound) {
  RandomStream rng(2024, "test.coin");
  int low = 0;
  constexpr int kSamples = 100000;
  for (int k = 0; k < kSamples; ++k) low += advise::select_action({{0.5, 0.5}}, rng) == kLow;
  const double freq = static_cast<double>(low) / kSamples;
  EXPECT_GE(freq, 0.494);
  EXPECT_LE(freq, 0.506);
}

TEST(SelectAction, SameSeedSameSequence) {
  RandomStream a(99, "policy");
  RandomStream b(99, "policy");
  const ActionProbabilities p{{0.3, 0.7}};
  for (int k = 0; k < 5000; ++k) ASSERT_EQ(advise::select_action(p, a), advise::select_action(p, b));
}

TEST(SelectAction, RejectsInvalidDistributions) {
  RandomStream rng(1);
  EXPECT_THROW(advise::select_action({{0.5, 0.6}}, rng), advise::InvalidArgument);
  EXPECT_THROW(advise::select_action({{-0.1, 1.1}}, rng), advise::InvalidArgument);
  EXPECT_THROW(advise::select_action({{NAN, 0.5}}, rng), advise::InvalidArgument);
}

TEST(RandomStream, NamedStreamsAreIndependentAndStable) {
  EXPECT_NE(RandomStream::seed_for(1, "a"), RandomStream::seed_for(1, "b"));
  EXPECT_NE(RandomStream::seed_for(1, "a"), RandomStream::seed_for(2, "a"));
  EXPECT_EQ(RandomStream::seed_for(1, "a"), RandomStream::seed_for(1, "a"));
  RandomStream rng(4);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}

TEST(ChainMdp, QLearningMatchesValueIteration) {
  RlHyperParams hp;
  hp.gamma = 0.9;
  hp.alpha = 0.1;
  const auto oracle = chain::value_iteration(hp.gamma);
  const auto learned = chain::learn(10000, hp, 17);
  for (int s = 0; s < chain::kStates; ++s) {
    for (const Action a : advise::kAllActions) {
      EXPECT_NEAR(learned.value(s, a), oracle[s][a], 1e-3) << "state " << s;
    }
    const Action best = oracle[s][kHigh] > oracle[s][kLow] ? kHigh : kLow;
    EXPECT_EQ(learned.greedy(s), best) << "state " << s;
  }
}

TEST(ChainMdp, OracleHasClosedForm) {
  const auto q = chain::value_iteration(0.9);
  EXPECT_NEAR(q[2][kHigh], 1.0, 1e-12);
  EXPECT_NEAR(q[1][kHigh], 0.9, 1e-12);
  EXPECT_NEAR(q[0][kHigh], 0.81, 1e-12);
  EXPECT_NEAR(q[0][kLow], 0.729, 1e-12);
  EXPECT_NEAR(q[2][kLow], 0.81, 1e-12);
}
