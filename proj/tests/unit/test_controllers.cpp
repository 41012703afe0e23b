#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scenarios.hpp"
#include "tsc/control/controllers.hpp"
#include "tsc/error.hpp"
#include "tsc/traffic/demand.hpp"

using namespace tsc::control;
using namespace tsc::traffic;
using tsc::testing::make_grid;

TEST(FixedTime, ModularPlan) {
  FixedTimePlan plan{{0, 1, 2, 3}, {20, 20, 20, 20}};
  EXPECT_EQ(fixed_time_decide(25, plan), 1);
  EXPECT_EQ(fixed_time_decide(0, plan), 0);
  for (double t = 0; t < 80; t += 5) EXPECT_EQ(fixed_time_decide(t, plan), fixed_time_decide(t + 80, plan));
  FixedTimePlan defaults;
  EXPECT_EQ(defaults.cycle(), 120.0);
  EXPECT_EQ(fixed_time_decide(35, defaults), 2);
}

TEST(FixedTime, InvalidPlansAreRejected) {
  EXPECT_THROW(FixedTimePlan({}, {}).validate(), tsc::ValidationError);
  EXPECT_THROW(FixedTimePlan({0}, {7}).validate(), tsc::ValidationError);
  EXPECT_THROW(FixedTimePlan({9}, {5}).validate(), tsc::ValidationError);
}

TEST(MaxPressure, UniqueMaximumAndTieRule) {
  auto net = make_grid(1, 1);
  std::mt19937_64 rng(1);
  auto m = tsc::testing::random_measurement(*net, 0, rng);
  for (auto& l : m.incoming) l.vehicles.clear(), l.stopped = l.moving = 0;
  for (auto& l : m.outgoing) l.vehicles.clear(), l.stopped = l.moving = 0;
  EXPECT_EQ(max_pressure_decide(m), 0);  // all equal
  auto& ns = m.incoming[slot_of(Approach::North, Turn::Straight)];
  auto& ss = m.incoming[slot_of(Approach::South, Turn::Straight)];
  ns.moving = 5;
  ss.moving = 5;
  EXPECT_EQ(max_pressure_decide(m), 0);
  ns.moving = 0;
  ss.moving = 0;
  m.incoming[slot_of(Approach::West, Turn::Straight)].stopped = 10;
  EXPECT_EQ(max_pressure_decide(m), 1);
}

TEST(MaxPressure, MatchesExhaustiveOracleAndIsScaleInvariant) {
  auto net = make_grid(2, 2);
  std::mt19937_64 rng(17);
  for (int k = 0; k < 1000; ++k) {
    const int node = k % 4;
    auto m = tsc::testing::random_measurement(*net, node, rng);
    ASSERT_EQ(max_pressure_decide(m), tsc::testing::oracle_max_pressure(*net, m));
    const auto scores = max_pressure_scores(m);
    auto scaled = m;
    for (auto& l : scaled.incoming) l.moving *= 3, l.stopped *= 3;
    for (auto& l : scaled.outgoing) l.moving *= 3, l.stopped *= 3;
    const auto scaled_scores = max_pressure_scores(scaled);
    for (int p = 0; p < 8; ++p) ASSERT_DOUBLE_EQ(scaled_scores[p], 3.0 * scores[p]);
    ASSERT_EQ(max_pressure_decide(scaled), max_pressure_decide(m));
  }
}

TEST(AdvancedMp, EmptyNetworkPicksPhaseZero) {
  auto net = make_grid(1, 1);
  std::mt19937_64 rng(1);
  auto m = tsc::testing::random_measurement(*net, 0, rng);
  for (auto& l : m.incoming) l.vehicles.clear();
  const auto s = advanced_mp_scores(m, 55.0);
  for (double v : s) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(advanced_mp_decide(m, 55.0), 0);
}

TEST(AdvancedMp, RangeMembershipChangesScoreByMoverCount) {
  auto net = make_grid(1, 1);
  std::mt19937_64 rng(1);
  auto m = tsc::testing::random_measurement(*net, 0, rng);
  for (auto& l : m.incoming) l.vehicles.clear();
  auto& lane = m.incoming[slot_of(Approach::North, Turn::Straight)];
  lane.vehicles = {{250.0, 5.0, 5.0, false}, {244.0, 5.0, 5.0, false}};  // 50 and 56 m from the line
  const auto inside = advanced_mp_scores(m, 56.0);
  const auto outside = advanced_mp_scores(m, 49.0);
  EXPECT_EQ(inside[0] - outside[0], 2.0);
  EXPECT_EQ(advanced_mp_scores(m, 53.0)[0] - outside[0], 1.0);
}

TEST(AdvancedMp, MatchesExhaustiveOracle) {
  auto net = make_grid(2, 2);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 1000; ++k) {
    auto m = tsc::testing::random_measurement(*net, k % 4, rng);
    ASSERT_EQ(advanced_mp_decide(m, 55.555), tsc::testing::oracle_advanced_mp(*net, m, 55.555));
  }
}

TEST(Controllers, PureFunctionsOfMeasurements) {
  auto net = make_grid(2, 2);
  tsc::encoding::Environment env(net, {});
  DemandSpec demand;
  env.reset(synthetic_demand(*net, demand, 3), 0);
  std::vector<int> phases(4, 0);
  for (int k = 0; k < 30; ++k) env.step(phases);
  MaxPressureController mp;
  AdvancedMpController amp;
  EXPECT_EQ(mp.decide(env).phases, mp.decide(env).phases);
  EXPECT_EQ(amp.decide(env).phases, amp.decide(env).phases);
  EXPECT_EQ(decisions_csv_row(3, mp.decide(env)).substr(0, 4), "3,0,");
  EXPECT_THROW(make_controller("colight"), tsc::ValidationError);
}

TEST(Controllers, RandomIsSeeded) {
  auto net = make_grid(2, 2);
  tsc::encoding::Environment env(net, {});
  env.reset({}, 0);
  RandomController a, b;
  a.reset(4);
  b.reset(4);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(a.decide(env).phases, b.decide(env).phases);
}
