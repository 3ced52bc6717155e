#include <gtest/gtest.h>

#include <cmath>

#include "tsc/controllers.hpp"
#include "tsc/env.hpp"

using namespace tsc;

namespace {

constexpr double kVmax = 50.0 / 3.6;

std::array<std::int64_t, kNumPhases> counters(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  return {a, b, c, d};
}

}  // namespace

TEST(EncodeState, EmptyIntersection) {
  const auto s = encode_state(Snapshot{}, 0, counters(0, 0, 0, 0), kVmax);
  ASSERT_EQ(s.size(), 464u);
  for (int i = 0; i < kOneHotOffset; i += 2) {
    ASSERT_EQ(s[i], 1.0f);
    ASSERT_EQ(s[i + 1], -1.0f);
  }
  EXPECT_EQ(s[456], 1.0f);
  EXPECT_EQ(s[457], 0.0f);
  EXPECT_EQ(s[458], 0.0f);
  EXPECT_EQ(s[459], 0.0f);
  for (int i = kCounterOffset; i < kStateDim; ++i) EXPECT_EQ(s[i], 0.0f);
}

TEST(EncodeState, VehicleAtRangeWithFreeSpeed) {
  Snapshot snap;
  snap[5].vehicles.push_back({150.0, kVmax});
  const auto s = encode_state(snap, 2, counters(0, 0, 0, 0), kVmax);
  EXPECT_FLOAT_EQ(s[5 * kLaneBlock], 1.0f);
  EXPECT_FLOAT_EQ(s[5 * kLaneBlock + 1], 1.0f);
  EXPECT_EQ(s[kOneHotOffset + 2], 1.0f);
}

TEST(EncodeState, AffineMap) {
  Snapshot snap;
  snap[0].vehicles.push_back({0.0, 0.0});
  snap[0].vehicles.push_back({75.0, kVmax / 2});
  const auto s = encode_state(snap, 0, counters(0, 0, 0, 0), kVmax);
  EXPECT_FLOAT_EQ(s[0], -1.0f);
  EXPECT_FLOAT_EQ(s[1], -1.0f);
  EXPECT_FLOAT_EQ(s[2], 0.0f);
  EXPECT_NEAR(s[3], 0.0f, 1e-7);
  EXPECT_EQ(s[4], 1.0f);
  EXPECT_EQ(s[5], -1.0f);
}

TEST(EncodeState, CountersClampAtOne) {
  const auto s = encode_state(Snapshot{}, 0, counters(750, 250, 500, 0), kVmax);
  EXPECT_FLOAT_EQ(s[kCounterOffset + 0], 1.0f);
  EXPECT_FLOAT_EQ(s[kCounterOffset + 1], 0.5f);
  EXPECT_FLOAT_EQ(s[kCounterOffset + 2], 1.0f);
  EXPECT_FLOAT_EQ(s[kCounterOffset + 3], 0.0f);
}

TEST(EncodeState, Errors) {
  EXPECT_THROW(encode_state(Snapshot{}, 4, counters(0, 0, 0, 0), kVmax), std::domain_error);
  EXPECT_THROW(encode_state(Snapshot{}, 0, counters(-1, 0, 0, 0), kVmax), std::domain_error);
}

TEST(EquityReward, SwitchExampleSymbolic) {
  const std::vector<std::vector<std::int64_t>> rel{{12}, {}, {}, {}, {}, {20, 30}};
  for (double g : {0.5, 0.9, 0.98}) EXPECT_NEAR(equity_reward(rel, 0.0, g), 1 + 2 * std::pow(g, 5), 1e-15);
}

TEST(EquityReward, SwitchExampleNumeric) {
  const std::vector<std::vector<std::int64_t>> rel{{12}, {}, {}, {}, {}, {20, 30}};
  EXPECT_NEAR(equity_reward(rel, 0.0, 0.9), 2.18098, 1e-12);
}

TEST(EquityReward, FourthRoot) {
  const std::vector<std::vector<std::int64_t>> rel{{16}};
  EXPECT_DOUBLE_EQ(equity_reward(rel, 0.25, 0.98), 2.0);
}

TEST(EquityReward, RejectsNonPositiveTravel) {
  const std::vector<std::vector<std::int64_t>> rel{{0}};
  EXPECT_THROW(equity_reward(rel, 0.25, 0.98), std::domain_error);
}

TEST(EquityReward, PerStepModeIgnoresElapsedSeconds) {
  const std::vector<std::vector<std::int64_t>> rel{{1}, {}, {}, {}, {}, {1, 1}};
  EXPECT_DOUBLE_EQ(equity_reward(rel, 0.0, 0.9, false), 3.0);
}

TEST(EquityReward, NondecreasingInEta) {
  CounterRng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::int64_t>> rel(6);
    for (auto& s : rel)
      for (int k = static_cast<int>(rng.below(3)); k > 0; --k) s.push_back(1 + static_cast<std::int64_t>(rng.below(200)));
    double prev = -1;
    for (double eta = 0.0; eta <= 1.0; eta += 0.05) {
      const double r = equity_reward(rel, eta, 0.98);
      ASSERT_GE(r, prev - 1e-12);
      ASSERT_GE(r, 0.0);
      prev = r;
    }
  }
}

TEST(RewardConfig, RejectsOtherForms) {
  EXPECT_THROW((RewardConfig{0.25, 0.98, EquityForm::Linear}.validate()), std::invalid_argument);
  EXPECT_THROW((RewardConfig{0.25, 0.98, EquityForm::Base}.validate()), std::invalid_argument);
  EXPECT_THROW((RewardConfig{-0.1, 0.98}.validate()), std::domain_error);
  EXPECT_THROW((RewardConfig{0.25, 1.0}.validate()), std::domain_error);
}

TEST(SimulatedSwitch, YellowReleaseThenTwoOnNewGreen) {
  // One committed vehicle clears in the first yellow second; two stopped
  // vehicles on phase-1 lanes leave in the first green second.
  Simulator sim;
  sim.place_vehicle(0, 5.0, 10.0, 0);
  sim.place_vehicle(2, 0.0, 0.0, 0);
  sim.place_vehicle(5, 0.0, 0.0, 0);
  const auto tick = sim.apply_action(1);
  ASSERT_EQ(tick.elapsed, 6);
  std::vector<std::size_t> counts;
  for (const auto& s : tick.seconds) counts.push_back(s.releases.size());
  EXPECT_EQ(counts, (std::vector<std::size_t>{1, 0, 0, 0, 0, 2}));
  EXPECT_NEAR(equity_reward(tick, 0.0, 0.9), 2.18098, 1e-12);
}

TEST(Env, IdleStepHasZeroReward) {
  Env env;
  env.reset(ArrivalStream{}, 100);
  const auto tr = env.step(0);
  EXPECT_EQ(tr.reward, 0.0);
  EXPECT_EQ(tr.delta_t, 1);
  EXPECT_FALSE(tr.done);
}

TEST(Env, DeltaTFollowsAction) {
  Env env;
  env.reset(ArrivalStream{}, 100);
  EXPECT_EQ(env.step(0).delta_t, 1);
  EXPECT_EQ(env.step(3).delta_t, 6);
  EXPECT_EQ(env.step(3).delta_t, 1);
  EXPECT_EQ(env.last_action(), 3);
  EXPECT_EQ(env.state()[kOneHotOffset + 3], 1.0f);
}

TEST(Env, StepAfterDoneThrows) {
  Env env;
  env.reset(ArrivalStream{}, 2);
  env.step(1);
  EXPECT_TRUE(env.done());
  EXPECT_THROW(env.step(1), EpisodeEnded);
}

TEST(Env, ElapsedSecondsCoverEpisode) {
  DemandEpisode ep = sample_episode(0, 6000, 1200, 4);
  Env env;
  env.reset(ep);
  Controller c = UniformController(10);
  std::int64_t total = 0;
  while (!env.done()) {
    const auto tr = env.step(controller_next(c, observe(env.sim(), &env.last_tick())));
    total += tr.delta_t;
  }
  EXPECT_GE(total, 1200);
  EXPECT_LE(total, 1200 + kTransitionSeconds);
  EXPECT_EQ(total, env.sim().clock());
}

TEST(Env, StatesStayInUnitBox) {
  Env env;
  env.reset(sample_eval_episode(4500, 5500, 600, 2));
  CounterRng rng(3);
  while (!env.done()) {
    const auto tr = env.step(static_cast<int>(rng.below(4)));
    for (float x : tr.next_state) ASSERT_TRUE(x >= -1.0f && x <= 1.0f);
    ASSERT_GE(tr.reward, 0.0);
  }
}

TEST(DiscountedReturn, ReducesToPerSecondSumWhenAllStepsAreOneSecond) {
  std::vector<Transition> trs(5);
  const double g = 0.9;
  double expect = 0;
  for (int i = 0; i < 5; ++i) {
    trs[i].reward = i + 1;
    expect += std::pow(g, i) * (i + 1);
  }
  EXPECT_NEAR(discounted_return(trs, g), expect, 1e-12);
}

TEST(DiscountedReturn, SameReleasesAnyScheduleSameReturn) {
  // Per-second release trace chopped into decisions in two different ways.
  const double g = 0.97;
  const std::vector<std::vector<std::int64_t>> trace{{11}, {}, {}, {13, 40}, {}, {}, {9}, {}, {}, {}, {}, {22}, {15}};
  auto build = [&](const std::vector<int>& sizes) {
    std::vector<Transition> out;
    std::size_t at = 0;
    for (int n : sizes) {
      Transition t;
      t.delta_t = n;
      std::vector<std::vector<std::int64_t>> part(trace.begin() + at, trace.begin() + at + n);
      t.reward = equity_reward(part, 0.25, g);
      out.push_back(t);
      at += n;
    }
    return out;
  };
  const auto a = build({1, 6, 6});
  const auto b = build({6, 1, 1, 1, 1, 1, 1, 1});
  EXPECT_NEAR(discounted_return(a, g), discounted_return(b, g), 1e-12);
}
