#include <gtest/gtest.h>

#include <functional>

#include "sigdet/config.hpp"
#include "sigdet/sigdet.hpp"

namespace sigdet {
namespace {

using config::Json;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kParameterOutOfRange;
}

const char* kCounterexampleDoc = R"({
  "prior": 0.5, "horizon": 3, "message_alphabet": 2,
  "sensors": [
    {"pmf": [[[0.5, 0.5], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]], [[1, 0], [0, 1]]]},
    {"pmf": [[["2/5", "3/5", 0], [0, "3/5", "2/5"]], [[0, 1, 0], [0, 1, 0]], [[0, 1, 0], [0, 1, 0]]]}
  ],
  "edges": [[1, 2], [2, 1]],
  "cost": {
    "operational": {"form": "active-set", "params": {"table": {"": 0, "1": 1, "2": 1, "1,2": 1.5}}},
    "terminal": {"form": "last-stopper", "params": {"mu": 100}}
  }
})";

TEST(LoadScenario, FullDocumentMatchesBuilder) {
  const Scenario s = config::load_scenario(Json::parse(kCounterexampleDoc));
  EXPECT_TRUE(is_counterexample_shape(s));
  const auto profile = preset_strategies(Preset::kNonThreshold, s);
  EXPECT_NEAR(exact_expected_cost(s, profile).expected_cost, 3.2, 1e-12);
}

TEST(LoadScenario, Presets) {
  const Scenario c = config::load_scenario(Json::parse(R"({"preset": "counterexample", "params": {"K": 1.9}})"));
  EXPECT_DOUBLE_EQ(std::get<ActiveSetOperationalCost>(c.costs().operational).by_mask[3], 1.9);
  const Scenario one = config::load_scenario(
      Json::parse(R"({"preset": "one-way", "params": {"sensors": 3, "horizon": 2, "accuracy": 0.8, "mu": 9}})"));
  EXPECT_EQ(one.sensor_count(), 3);
  EXPECT_EQ(one.graph().predecessors(0), (std::vector<int>{1, 2}));
  const Scenario none = config::load_scenario(Json::parse(R"({"preset": "no-comm"})"));
  EXPECT_TRUE(std::holds_alternative<TableTerminalCost>(none.costs().terminal));
  const Scenario two = config::load_scenario(Json::parse(R"({"preset": "two-way", "params": {"unit_costs": [1, 2]}})"));
  EXPECT_EQ(two.graph().edges().size(), 2u);
}

TEST(LoadScenario, ErrorsKeepTheirKinds) {
  EXPECT_EQ(kind_of([] { config::load_scenario(Json::parse(R"({"preset": "nope"})")); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { config::load_scenario(Json::parse(R"({"horizon": 2})")); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { config::load_scenario(Json::parse("[1,2]")); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] {
              config::load_scenario(Json::parse(R"({"preset": "counterexample", "params": {"K": 2.5}})"));
            }),
            ErrorKind::kParameterOutOfRange);
  // Prior outside (0,1).
  auto doc = Json::parse(kCounterexampleDoc);
  doc["prior"] = 1.0;
  EXPECT_EQ(kind_of([&] { config::load_scenario(doc); }), ErrorKind::kInvalidPrior);
  // Rows that do not sum to one.
  doc = Json::parse(kCounterexampleDoc);
  doc["sensors"][0]["pmf"][0][0] = Json::array({0.5, 0.4});
  EXPECT_EQ(kind_of([&] { config::load_scenario(doc); }), ErrorKind::kPmfNotNormalized);
  // Missing active set.
  doc = Json::parse(kCounterexampleDoc);
  doc["cost"]["operational"]["params"]["table"].erase("1,2");
  EXPECT_EQ(kind_of([&] { config::load_scenario(doc); }), ErrorKind::kCostTableIncomplete);
  // Edge to a sensor that does not exist.
  doc = Json::parse(kCounterexampleDoc);
  doc["edges"].push_back(Json::array({1, 3}));
  EXPECT_EQ(kind_of([&] { config::load_scenario(doc); }), ErrorKind::kGraphInconsistent);
  // Unknown cost form.
  doc = Json::parse(kCounterexampleDoc);
  doc["cost"]["terminal"]["form"] = "majority";
  EXPECT_EQ(kind_of([&] { config::load_scenario(doc); }), ErrorKind::kConfig);
}

TEST(LoadScenario, MissingFile) {
  EXPECT_EQ(kind_of([] { config::load_scenario_file("/nonexistent/scenario.json"); }), ErrorKind::kConfig);
}

class LoadProfile : public ::testing::Test {
 protected:
  Scenario scenario = counterexample_scenario(1.5, 0.4, 100.0);
};

TEST_F(LoadProfile, ThresholdDocumentReproducesPreset) {
  const auto doc = Json::parse(R"({"strategies": [
    {"type": "threshold", "off_path": "stop0", "rules": [
      {"t": 1},
      {"t": 2, "message_history": [["0"]], "stop0": [0, 1]},
      {"t": 2, "message_history": [[1]], "stop1": [0, 1]},
      {"t": 2, "message_history": [["b"]]},
      {"t": 3, "stop1": [0, 0.5], "stop0": [0.5, 1]}]},
    {"type": "threshold", "off_path": "stop0", "rules": [
      {"t": 1, "stop1": [0, 0], "stop0": [1, 1]},
      {"t": 2, "stops": {"0": [0, 1]}},
      {"t": 3, "stop0": [0, 1]}]}
  ]})");
  const auto loaded = compile_profile(scenario, config::load_profile(doc, scenario));
  const auto preset = compile_profile(scenario, preset_strategies(Preset::kEx1, scenario));
  EXPECT_EQ(loaded, preset);
}

TEST_F(LoadProfile, PresetAndTabular) {
  const auto doc = Json::parse(R"({"strategies": [
    {"type": "preset", "name": "non_threshold"},
    {"type": "tabular", "entries": [
      {"t": 1, "observations": [0], "decision": "b"},
      {"observations": [1], "decision": 0},
      {"observations": [2], "decision": "1"}]}
  ]})");
  const auto profile = config::load_profile(doc, scenario);
  const auto& table = std::get<TabularStrategy>(profile[1]);
  EXPECT_EQ(table.decide(1, 0), Decision::blank());
  EXPECT_EQ(table.decide(1, 1), Decision::stop(0));
  EXPECT_EQ(table.decide(1, 2), Decision::stop(1));
  EXPECT_EQ(table.entry_count(), 3u);
  EXPECT_TRUE(std::holds_alternative<ThresholdStrategy>(profile[0]));
  const auto named = config::load_profile(Json::parse(R"({"preset": "ex2"})"), scenario);
  EXPECT_NEAR(exact_expected_cost(scenario, named).expected_cost, 3.3, 1e-12);
}

TEST_F(LoadProfile, Errors) {
  auto load = [&](const char* text) { return [&, text] { config::load_profile(Json::parse(text), scenario); }; };
  EXPECT_EQ(kind_of(load(R"({"strategies": []})")), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(load(R"({"preset": "ex9"})")), ErrorKind::kConfig);
  EXPECT_EQ(kind_of(load(R"({"strategies": [{"type": "magic"}, {"type": "preset", "name": "ex1"}]})")),
            ErrorKind::kConfig);
  // Overlapping intervals.
  EXPECT_EQ(kind_of(load(R"({"strategies": [
    {"type": "threshold", "rules": [{"t": 1, "stop0": [0, 0.6], "stop1": [0.4, 1]}]},
    {"type": "preset", "name": "ex1"}]})")),
            ErrorKind::kConfig);
  // Entry time that disagrees with its observations.
  EXPECT_EQ(kind_of(load(R"({"strategies": [
    {"type": "tabular", "entries": [{"t": 2, "observations": [0], "decision": 0}]},
    {"type": "preset", "name": "ex1"}]})")),
            ErrorKind::kConfig);
  // Message history of the wrong length.
  EXPECT_EQ(kind_of(load(R"({"strategies": [
    {"type": "threshold", "rules": [{"t": 3, "message_history": [["b"]], "stop0": [0, 1]}]},
    {"type": "preset", "name": "ex1"}]})")),
            ErrorKind::kConfig);
  // Stop symbol outside the alphabet.
  EXPECT_EQ(kind_of(load(R"({"strategies": [
    {"type": "threshold", "rules": [{"t": 1, "stops": {"2": [0, 1]}}]},
    {"type": "preset", "name": "ex1"}]})")),
            ErrorKind::kConfig);
  EXPECT_EQ(kind_of(load(R"({"strategies": [
    {"type": "tabular", "entries": [{"observations": [0], "decision": "x"}]},
    {"type": "preset", "name": "ex1"}]})")),
            ErrorKind::kConfig);
}

TEST(SampleConfigs, AllLoad) {
  const std::string dir = SIGDET_SAMPLE_CONFIGS;
  for (const char* name : {"counterexample.json", "counterexample_full.json", "one_way_hedge.json", "two_way.json",
                           "no_comm.json"}) {
    EXPECT_NO_THROW(config::load_scenario_file(dir + "/" + name)) << name;
  }
  const Scenario s = config::load_scenario_file(dir + "/counterexample_full.json");
  for (const char* name : {"profile_ex1.json", "profile_threshold.json", "profile_tabular.json"}) {
    EXPECT_NO_THROW(exact_expected_cost(s, config::load_profile_file(dir + "/" + name, s))) << name;
  }
}

}  // namespace
}  // namespace sigdet
