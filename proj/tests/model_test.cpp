#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "sigdet/sigdet.hpp"
#include "support/random_scenarios.hpp"

namespace sigdet {
namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kConfig;
}

ObservationModel::Table fair_coin(int sensors, int horizon) { return binary_symmetric_pmfs(sensors, horizon, 0.5); }

TEST(Scenario, DirectConstruction) {
  Scenario s(0.5, 3, 2, ObservationModel(fair_coin(2, 3)), CommGraph(2, {{0, 1}}),
             CostSpec{LinearOperationalCost{{1.0, 1.0}}, LastStopperTerminalCost{10.0}});
  EXPECT_EQ(s.sensor_count(), 2);
  EXPECT_EQ(s.horizon(), 3);
  EXPECT_EQ(s.graph().predecessors(1), std::vector<int>{0});
  EXPECT_EQ(s.graph().successors(0), std::vector<int>{1});
}

TEST(Scenario, RejectsUnnormalizedPmf) {
  auto table = fair_coin(1, 1);
  table[0][0][0] = {0.5, 0.4};
  EXPECT_EQ(kind_of([&] { ObservationModel m(table); }), ErrorKind::kPmfNotNormalized);
}

TEST(Scenario, RejectsBadPrior) {
  for (double p : {0.0, 1.0, -0.1, 1.5}) {
    EXPECT_EQ(kind_of([&] {
                Scenario(p, 1, 2, ObservationModel(fair_coin(1, 1)), CommGraph(1, {}),
                         CostSpec{LinearOperationalCost{{1.0}}, LastStopperTerminalCost{1.0}});
              }),
              ErrorKind::kInvalidPrior);
  }
}

TEST(Scenario, RejectsInconsistentGraph) {
  EXPECT_EQ(kind_of([] { CommGraph(2, {{0, 0}}); }), ErrorKind::kGraphInconsistent);
  EXPECT_EQ(kind_of([] { CommGraph(2, {{0, 2}}); }), ErrorKind::kGraphInconsistent);
  EXPECT_EQ(kind_of([] { CommGraph(2, {{0, 1}, {0, 1}}); }), ErrorKind::kGraphInconsistent);
  EXPECT_EQ(kind_of([] {
              Scenario(0.5, 1, 2, ObservationModel(fair_coin(2, 1)), CommGraph(3, {}),
                       CostSpec{LinearOperationalCost{{1.0, 1.0}}, LastStopperTerminalCost{1.0}});
            }),
            ErrorKind::kGraphInconsistent);
}

TEST(Scenario, RejectsIncompleteCostTables) {
  EXPECT_EQ(kind_of([] {
              Scenario(0.5, 1, 2, ObservationModel(fair_coin(2, 1)), CommGraph(2, {}),
                       CostSpec{ActiveSetOperationalCost{{0.0, 1.0, 1.0}}, LastStopperTerminalCost{1.0}});
            }),
            ErrorKind::kCostTableIncomplete);
  EXPECT_EQ(kind_of([] {
              Scenario(0.5, 1, 2, ObservationModel(fair_coin(1, 1)), CommGraph(1, {}),
                       CostSpec{LinearOperationalCost{{1.0}}, TableTerminalCost{{0.0, 1.0, 1.0}, false}});
            }),
            ErrorKind::kCostTableIncomplete);
  EXPECT_EQ(kind_of([] {
              Scenario(0.5, 1, 2, ObservationModel(fair_coin(1, 1)), CommGraph(1, {}),
                       CostSpec{LinearOperationalCost{{-1.0}}, LastStopperTerminalCost{1.0}});
            }),
            ErrorKind::kParameterOutOfRange);
}

TEST(Counterexample, MatchesTheInstance) {
  const Scenario s = counterexample_scenario(1.5, 0.4, 100.0);
  EXPECT_EQ(s.sensor_count(), 2);
  EXPECT_EQ(s.horizon(), 3);
  EXPECT_DOUBLE_EQ(s.prior(), 0.5);
  const auto& op = std::get<ActiveSetOperationalCost>(s.costs().operational);
  EXPECT_EQ(op.by_mask, (std::vector<double>{0.0, 1.0, 1.0, 1.5}));
  EXPECT_DOUBLE_EQ(s.observations().prob(1, 1, 1, 2), 0.4);
  EXPECT_DOUBLE_EQ(s.observations().prob(1, 1, 0, 0), 0.4);
  EXPECT_DOUBLE_EQ(s.observations().prob(1, 2, 1, 2), 0.0);
  // The third observation of sensor 1 reveals H.
  for (int h = 0; h < 2; ++h) {
    for (int y = 0; y < 2; ++y) EXPECT_DOUBLE_EQ(s.observations().prob(0, 3, h, y), y == h ? 1.0 : 0.0);
  }
  EXPECT_EQ(s.graph().edges(), (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));
  EXPECT_DOUBLE_EQ(std::get<LastStopperTerminalCost>(s.costs().terminal).mu, 100.0);
}

TEST(Counterexample, RangeChecks) {
  EXPECT_EQ(kind_of([] { counterexample_scenario(2.5, 0.4, 100.0); }), ErrorKind::kParameterOutOfRange);
  EXPECT_EQ(kind_of([] { counterexample_scenario(1.5, 1.0, 100.0); }), ErrorKind::kParameterOutOfRange);
  EXPECT_EQ(kind_of([] { counterexample_scenario(1.5, 0.4, 0.0); }), ErrorKind::kParameterOutOfRange);
}

TEST(Counterexample, DefaultMuIsHundredTimesLargestOperationalCost) {
  // Longest trajectory: both active for three steps, 3K.
  const Scenario s = counterexample_scenario(1.5, 0.4);
  EXPECT_DOUBLE_EQ(std::get<LastStopperTerminalCost>(s.costs().terminal).mu, 450.0);
}

TEST(SpecialCases, EdgeSets) {
  SpecialCaseParams p;
  p.pmf = fair_coin(2, 2);
  p.unit_costs = {1.0, 1.0};
  EXPECT_TRUE(special_case_scenario(SpecialCase::kNoCommunication, p).graph().edges().empty());

  p.pmf = fair_coin(3, 2);
  p.unit_costs = {1.0, 1.0, 1.0};
  EXPECT_EQ(special_case_scenario(SpecialCase::kOneWay, p).graph().edges(),
            (std::vector<std::pair<int, int>>{{1, 0}, {2, 0}}));

  p.pmf = fair_coin(2, 2);
  p.unit_costs = {1.0, 1.0};
  p.mu = 7.0;
  const Scenario two = special_case_scenario(SpecialCase::kTwoWay, p);
  EXPECT_EQ(two.graph().edges(), (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));
  // Sensor 2 stops later, so only its decision matters.
  const StoppingOutcome outcome{{0, 1, Decision::stop(1)}, {1, 2, Decision::stop(0)}};
  EXPECT_DOUBLE_EQ(total_cost(two, 0, outcome).terminal, 0.0);
  EXPECT_DOUBLE_EQ(total_cost(two, 1, outcome).terminal, 7.0);
}

TEST(SpecialCases, NoCommDefaultTableCountsWrongDecisions) {
  SpecialCaseParams p;
  p.pmf = fair_coin(2, 1);
  p.unit_costs = {1.0, 1.0};
  p.mu = 5.0;
  const Scenario s = special_case_scenario(SpecialCase::kNoCommunication, p);
  const StoppingOutcome both_one{{0, 1, Decision::stop(1)}, {1, 1, Decision::stop(1)}};
  EXPECT_DOUBLE_EQ(total_cost(s, 0, both_one).terminal, 10.0);
  EXPECT_DOUBLE_EQ(total_cost(s, 1, both_one).terminal, 0.0);
}

TEST(SpecialCases, TwoWayNeedsTwoSensors) {
  SpecialCaseParams p;
  p.pmf = fair_coin(3, 1);
  p.unit_costs = {1.0, 1.0, 1.0};
  EXPECT_EQ(kind_of([&] { special_case_scenario(SpecialCase::kTwoWay, p); }), ErrorKind::kParameterOutOfRange);
}

TEST(TotalCost, CounterexampleHandSums) {
  const Scenario s = counterexample_scenario(1.5, 0.4, 100.0);
  // tau1 = 2, tau2 = 1, last decision right: c({1,2}) + c({1}).
  const StoppingOutcome a{{0, 2, Decision::stop(0)}, {1, 1, Decision::stop(1)}};
  EXPECT_DOUBLE_EQ(total_cost(s, 0, a).total(), 2.5);
  // tau1 = 3, tau2 = 2, last decision wrong: 2K + 1 + mu.
  const StoppingOutcome b{{0, 3, Decision::stop(1)}, {1, 2, Decision::stop(0)}};
  EXPECT_DOUBLE_EQ(total_cost(s, 0, b).total(), 2 * 1.5 + 1 + 100.0);
  // Both stop at once: only c({1,2}).
  const StoppingOutcome c{{0, 1, Decision::stop(0)}, {1, 1, Decision::stop(0)}};
  EXPECT_DOUBLE_EQ(total_cost(s, 0, c).total(), 1.5);
}

TEST(TotalCost, LastStopperTieGoesToLowestIndex) {
  const Scenario s = counterexample_scenario(1.5, 0.4, 100.0);
  const StoppingOutcome tie{{0, 2, Decision::stop(0)}, {1, 2, Decision::stop(1)}};
  EXPECT_DOUBLE_EQ(total_cost(s, 0, tie).terminal, 0.0);
  EXPECT_DOUBLE_EQ(total_cost(s, 1, tie).terminal, 100.0);
}

TEST(TotalCost, InvariantUnderPermutation) {
  std::mt19937_64 rng(11);
  testing::RandomScenarioOptions opt;
  opt.max_sensors = 3;
  opt.max_horizon = 3;
  opt.table_costs = false;
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = testing::random_scenario(rng, opt);
    StoppingOutcome outcome;
    for (int j = 0; j < s.sensor_count(); ++j) {
      outcome.push_back({j, testing::uniform_int(rng, 1, s.horizon()),
                         Decision::stop(testing::uniform_int(rng, 0, s.message_alphabet() - 1))});
    }
    const int h = testing::uniform_int(rng, 0, 1);
    const double reference = total_cost(s, h, outcome).total();
    std::sort(outcome.begin(), outcome.end(), [](const auto& a, const auto& b) { return a.sensor < b.sensor; });
    do {
      EXPECT_DOUBLE_EQ(total_cost(s, h, outcome).total(), reference);
    } while (std::next_permutation(outcome.begin(), outcome.end(),
                                   [](const auto& a, const auto& b) { return a.sensor < b.sensor; }));
  }
}

TEST(TotalCost, TableTerminalWithTimes) {
  // One sensor, T = 2: index = (h * M + u) * T + (tau - 1).
  TableTerminalCost table{{0, 1, 2, 3, 4, 5, 6, 7}, true};
  Scenario s(0.5, 2, 2, ObservationModel(fair_coin(1, 2)), CommGraph(1, {}),
             CostSpec{LinearOperationalCost{{0.0}}, table});
  const StoppingOutcome o{{0, 2, Decision::stop(1)}};
  EXPECT_DOUBLE_EQ(total_cost(s, 1, o).terminal, 7.0);
  EXPECT_DOUBLE_EQ(total_cost(s, 0, o).terminal, 3.0);
}

TEST(ActiveSet, ShrinksMonotonically) {
  const std::vector<int> times{1, 3, 2};
  std::uint32_t previous = active_set(times, 1);
  EXPECT_EQ(previous, 0b111u);
  for (int t = 2; t <= 4; ++t) {
    const std::uint32_t now = active_set(times, t);
    EXPECT_EQ(now & ~previous, 0u);
    previous = now;
  }
  EXPECT_EQ(active_set(times, 4), 0u);
}

TEST(Numeric, ParsesRationals) {
  EXPECT_DOUBLE_EQ(parse_probability_text("1/4"), 0.25);
  EXPECT_DOUBLE_EQ(parse_probability_text(" 0.5 "), 0.5);
  EXPECT_THROW(parse_probability_text("1/0"), Error);
  EXPECT_THROW(parse_probability_text("x"), Error);
}

TEST(Numeric, FormatRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 3.4, 1e-300}) EXPECT_EQ(std::stod(format_double(x)), x);
}

}  // namespace
}  // namespace sigdet
