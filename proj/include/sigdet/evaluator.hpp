#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sigdet/dynamics.hpp"
#include "sigdet/error.hpp"
#include "sigdet/model.hpp"
#include "sigdet/numeric.hpp"
#include "sigdet/profile.hpp"
#include "sigdet/strategy.hpp"

namespace sigdet {

/// Expected cost of a profile with its decomposition.
struct CostReport {
  std::string method = "exact";
  double expected_cost = 0.0;
  double operational = 0.0;
  double terminal = 0.0;
  /// Probability that the terminal cost is positive.
  double error_probability = 0.0;
  /// Zero for exact evaluation.
  double standard_error = 0.0;
  /// Monte Carlo draws, or positive-probability trajectories enumerated.
  std::uint64_t samples = 0;
  /// Total enumerated probability; 1 up to rounding for exact evaluation.
  double probability_mass = 0.0;
};

/// Number of joint observation sequences per hypothesis.
inline std::uint64_t trajectory_count(const Scenario& scenario, std::uint64_t budget) {
  std::uint64_t count = 1;
  for (int j = 0; j < scenario.sensor_count(); ++j) {
    for (int t = 0; t < scenario.horizon(); ++t) {
      const auto a = static_cast<std::uint64_t>(scenario.observations().alphabet_size(j));
      if (count > budget / a) {
        throw Error(ErrorKind::kBudgetExceeded, "joint observation space exceeds the enumeration budget of " +
                                                    std::to_string(budget) + " trajectories");
      }
      count *= a;
    }
  }
  return count;
}

/// Calls visit(h, weight, obs) for every (h, joint observation sequence) with
/// positive probability, hypothesis outermost. Branches are cut as soon as
/// their probability reaches zero.
template <class Visit>
void for_each_joint_trajectory(const Scenario& scenario, Visit&& visit, std::uint64_t budget = default_budget()) {
  (void)trajectory_count(scenario, budget);
  const int n = scenario.sensor_count();
  const int horizon = scenario.horizon();
  JointObservations obs(n, std::vector<int>(horizon, 0));
  const int positions = n * horizon;
  for (int h = 0; h < 2; ++h) {
    // Time-major positions: pos = (t-1) * n + j.
    auto recurse = [&](auto&& self, int pos, double weight) -> void {
      if (pos == positions) {
        visit(h, weight, static_cast<const JointObservations&>(obs));
        return;
      }
      const int j = pos % n;
      const int t = pos / n + 1;
      const auto& row = scenario.observations().row(j, t, h);
      for (std::size_t y = 0; y < row.size(); ++y) {
        if (row[y] == 0.0) continue;
        obs[j][t - 1] = static_cast<int>(y);
        self(self, pos + 1, weight * row[y]);
      }
    };
    if (scenario.prior_of(h) > 0.0) recurse(recurse, 0, scenario.prior_of(h));
  }
}

inline CostReport exact_expected_cost(const Scenario& scenario, const TabularProfile& profile,
                                      std::uint64_t budget = default_budget()) {
  check_profile(scenario, profile);
  Dynamics dynamics(scenario);
  KahanSum total, operational, terminal, error, mass;
  std::uint64_t count = 0;
  auto decide = [&](int j, int t, std::uint64_t code) { return profile[j].decide(t, code); };
  for_each_joint_trajectory(
      scenario,
      [&](int h, double weight, const JointObservations& obs) {
        const auto outcome = dynamics.run(decide, obs, scenario.horizon());
        const auto cost = total_cost(scenario, h, outcome);
        total.add(weight * cost.total());
        operational.add(weight * cost.operational);
        terminal.add(weight * cost.terminal);
        if (cost.terminal > 0.0) error.add(weight);
        mass.add(weight);
        ++count;
      },
      budget);
  CostReport report;
  report.method = "exact";
  report.expected_cost = total.value();
  report.operational = operational.value();
  report.terminal = terminal.value();
  report.error_probability = error.value();
  report.samples = count;
  report.probability_mass = mass.value();
  return report;
}

inline CostReport exact_expected_cost(const Scenario& scenario, const StrategyProfile& profile,
                                      std::uint64_t budget = default_budget()) {
  return exact_expected_cost(scenario, compile_profile(scenario, profile), budget);
}

/// Draws (H, joint observations) from the scenario measure.
class TrajectorySampler {
 public:
  TrajectorySampler(const Scenario& scenario, std::uint64_t seed) : scenario_(&scenario), rng_(seed) {
    const int n = scenario.sensor_count();
    dists_.resize(n);
    for (int j = 0; j < n; ++j) {
      for (int t = 1; t <= scenario.horizon(); ++t) {
        for (int h = 0; h < 2; ++h) {
          const auto& row = scenario.observations().row(j, t, h);
          dists_[j].emplace_back(row.begin(), row.end());
        }
      }
    }
  }

  int draw(JointObservations& obs) {
    const int h = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < scenario_->prior() ? 0 : 1;
    obs.assign(scenario_->sensor_count(), std::vector<int>(scenario_->horizon()));
    for (int j = 0; j < scenario_->sensor_count(); ++j) {
      for (int t = 1; t <= scenario_->horizon(); ++t) obs[j][t - 1] = dists_[j][(t - 1) * 2 + h](rng_);
    }
    return h;
  }

 private:
  const Scenario* scenario_;
  std::mt19937_64 rng_;
  std::vector<std::vector<std::discrete_distribution<int>>> dists_;
};

inline CostReport monte_carlo_cost(const Scenario& scenario, const TabularProfile& profile, std::uint64_t samples,
                                   std::uint64_t seed) {
  check_profile(scenario, profile);
  if (samples < 1) throw Error(ErrorKind::kParameterOutOfRange, "Monte Carlo needs at least one sample");
  Dynamics dynamics(scenario);
  TrajectorySampler sampler(scenario, seed);
  RunningStats total, operational, terminal, error;
  JointObservations obs;
  auto decide = [&](int j, int t, std::uint64_t code) { return profile[j].decide(t, code); };
  for (std::uint64_t s = 0; s < samples; ++s) {
    const int h = sampler.draw(obs);
    const auto outcome = dynamics.run(decide, obs, scenario.horizon());
    const auto cost = total_cost(scenario, h, outcome);
    total.add(cost.total());
    operational.add(cost.operational);
    terminal.add(cost.terminal);
    error.add(cost.terminal > 0.0 ? 1.0 : 0.0);
  }
  CostReport report;
  report.method = "mc";
  report.expected_cost = total.mean();
  report.operational = operational.mean();
  report.terminal = terminal.mean();
  report.error_probability = error.mean();
  report.standard_error = total.standard_error();
  report.samples = samples;
  report.probability_mass = 1.0;
  return report;
}

inline CostReport monte_carlo_cost(const Scenario& scenario, const StrategyProfile& profile, std::uint64_t samples,
                                   std::uint64_t seed) {
  return monte_carlo_cost(scenario, compile_profile(scenario, profile), samples, seed);
}

struct NamedProfile {
  std::string name;
  StrategyProfile profile;
};

struct ProfileComparison {
  struct Row {
    std::string name;
    CostReport report;
  };
  /// Sorted by ascending exact cost (stable for ties).
  std::vector<Row> rows;
  /// difference[a][b] = cost(rows[a]) - cost(rows[b]).
  std::vector<std::vector<double>> difference;
};

inline ProfileComparison compare_profiles(const Scenario& scenario, const std::vector<NamedProfile>& profiles) {
  if (profiles.empty()) throw Error(ErrorKind::kParameterOutOfRange, "nothing to compare");
  ProfileComparison out;
  for (const auto& p : profiles) out.rows.push_back({p.name, exact_expected_cost(scenario, p.profile)});
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
    return a.report.expected_cost < b.report.expected_cost;
  });
  for (const auto& a : out.rows) {
    std::vector<double> row;
    for (const auto& b : out.rows) row.push_back(a.report.expected_cost - b.report.expected_cost);
    out.difference.push_back(std::move(row));
  }
  return out;
}

inline std::string cost_report_csv_header() {
  return "profile,method,expected_cost,operational,terminal,error_prob,stderr,samples";
}

inline std::string cost_report_csv_row(const std::string& name, const CostReport& r) {
  return name + "," + r.method + "," + format_double(r.expected_cost) + "," + format_double(r.operational) + "," +
         format_double(r.terminal) + "," + format_double(r.error_probability) + "," +
         format_double(r.standard_error) + "," + std::to_string(r.samples);
}

}  // namespace sigdet
