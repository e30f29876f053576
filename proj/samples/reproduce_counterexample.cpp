// Builds the two-sensor counterexample, evaluates the three preset rules,
// and lets sensor 2 best-respond to the signaling rule of sensor 1.

#include <cstdio>

#include "sigdet/sigdet.hpp"

int main() {
  using namespace sigdet;
  const double K = 1.5;
  const double r1 = 0.4;
  const Scenario scenario = counterexample_scenario(K, r1, 100.0);
  const CounterexampleCosts closed = counterexample_closed_forms(K, r1);

  std::vector<NamedProfile> profiles;
  for (Preset p : {Preset::kEx1, Preset::kEx2, Preset::kNonThreshold}) {
    profiles.push_back({preset_name(p), preset_strategies(p, scenario)});
  }
  const ProfileComparison ranking = compare_profiles(scenario, profiles);
  std::printf("%-14s %10s\n", "profile", "exact");
  for (const auto& row : ranking.rows) std::printf("%-14s %10.6f\n", row.name.c_str(), row.report.expected_cost);
  std::printf("closed forms: ex1 %.6f  ex2 %.6f  non_threshold %.6f\n", closed.ex1, closed.ex2, closed.non_threshold);

  const TabularProfile signaling = compile_profile(scenario, profiles[2].profile);
  const BestResponse br = best_response(scenario, signaling, 1);
  std::printf("sensor 2 best response: %.6f (was %.6f)\n", br.report.expected_cost, ranking.rows.front().report.expected_cost);
  const StructureReport intervals = extract_intervals(br.table);
  std::printf("interval structure of the best response: %s\n", intervals.interval_structure() ? "yes" : "no");
  return 0;
}
