// Command-line front end: evaluation, simulation, best responses,
// person-by-person iteration and the counterexample report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sigdet/sigdet.hpp"

namespace {

using namespace sigdet;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitVerify = 4;

struct ScenarioOptions {
  std::string file;
  std::string preset;
  double K = 1.5;
  double r1 = 0.4;
  double mu = 0.0;  // 0 means "use the default"

  void add(CLI::App& app) {
    app.add_option("--scenario", file, "Scenario JSON file");
    app.add_option("--preset", preset, "Scenario preset: counterexample");
    app.add_option("--K", K, "Counterexample joint operating cost, 1 < K < 2");
    app.add_option("--r1", r1, "Counterexample signal probability at t=1, 0 < r1 < 1");
    app.add_option("--mu", mu, "Error cost (default: 100 x largest operational cost)");
  }

  Scenario load() const {
    if (!file.empty() && !preset.empty()) throw Error(ErrorKind::kConfig, "give either --scenario or --preset");
    if (!file.empty()) return config::load_scenario_file(file);
    if (preset.empty() || preset == "counterexample") {
      return counterexample_scenario(K, r1, mu > 0.0 ? std::optional<double>(mu) : std::nullopt);
    }
    throw Error(ErrorKind::kConfig, "unknown --preset '" + preset + "'; use --scenario for other presets");
  }
};

struct ProfileOptions {
  std::vector<std::string> files;
  std::string presets;

  void add(CLI::App& app, bool many) {
    app.add_option("--profile", files, many ? "Profile JSON file (repeatable)" : "Profile JSON file");
    app.add_option("--profiles", presets, "Comma-separated presets: ex1,ex2,non_threshold, or default (wait, then declare 0)");
  }

  std::vector<NamedProfile> load(const Scenario& scenario) const {
    std::vector<NamedProfile> out;
    for (const auto& f : files) {
      out.push_back({std::filesystem::path(f).stem().string(), config::load_profile_file(f, scenario)});
    }
    std::stringstream in(presets);
    std::string name;
    while (std::getline(in, name, ',')) {
      if (name == "default") {
        out.push_back({name, as_strategy_profile(default_profile(scenario))});
      } else if (!name.empty()) {
        out.push_back({name, preset_strategies(name, scenario)});
      }
    }
    if (out.empty()) throw Error(ErrorKind::kConfig, "no profile given (use --profile or --profiles)");
    return out;
  }

  NamedProfile load_one(const Scenario& scenario) const {
    auto all = load(scenario);
    if (all.size() != 1) throw Error(ErrorKind::kConfig, "this command takes exactly one profile");
    return all.front();
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kConfig, "cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const ScenarioOptions& so, const ProfileOptions& po, const std::string& method,
                 std::uint64_t samples, std::uint64_t seed) {
  if (method != "exact" && method != "mc" && method != "both") {
    throw Error(ErrorKind::kConfig, "--method must be exact, mc or both");
  }
  const Scenario scenario = so.load();
  const auto profiles = po.load(scenario);
  std::cout << cost_report_csv_header() << "\n";
  for (const auto& p : profiles) {
    const TabularProfile compiled = compile_profile(scenario, p.profile);
    if (method != "mc") std::cout << cost_report_csv_row(p.name, exact_expected_cost(scenario, compiled)) << "\n";
    if (method != "exact") {
      std::cout << cost_report_csv_row(p.name, monte_carlo_cost(scenario, compiled, samples, seed)) << "\n";
    }
  }
  return kExitOk;
}

std::vector<int> parse_row(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw Error(ErrorKind::kConfig, "bad observation '" + item + "'");
    }
  }
  return out;
}

std::string join(const std::vector<int>& v, char sep) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k > 0) out += sep;
    out += std::to_string(v[k]);
  }
  return out;
}

int cmd_simulate(const ScenarioOptions& so, const ProfileOptions& po, std::uint64_t samples, std::uint64_t seed,
                 const std::string& observations) {
  const Scenario scenario = so.load();
  const NamedProfile named = po.load_one(scenario);
  const TabularProfile profile = compile_profile(scenario, named.profile);
  std::cout << "sample,h,observations,decisions,stop_times,final_decisions,operational,terminal,total\n";

  auto emit = [&](std::uint64_t index, const std::string& h, const JointObservations& obs,
                  std::optional<int> hypothesis) {
    RolloutTrace trace;
    const StoppingOutcome outcome = rollout(scenario, profile, obs, &trace);
    std::vector<std::string> obs_text, dec_text;
    for (const auto& row : obs) obs_text.push_back(join(row, ' '));
    for (int j = 0; j < scenario.sensor_count(); ++j) {
      std::string s;
      for (const auto& step : trace.decisions) s += step[j].to_string();
      dec_text.push_back(s);
    }
    std::vector<int> times, finals;
    for (const auto& o : outcome) {
      times.push_back(o.stop_time);
      finals.push_back(o.decision.value());
    }
    auto joined = [](const std::vector<std::string>& v) {
      std::string out;
      for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ";" : "") + v[k];
      return out;
    };
    std::cout << index << "," << h << "," << joined(obs_text) << "," << joined(dec_text) << "," << join(times, ' ')
              << "," << join(finals, ' ');
    if (hypothesis) {
      const auto cost = total_cost(scenario, *hypothesis, outcome);
      std::cout << "," << format_double(cost.operational) << "," << format_double(cost.terminal) << ","
                << format_double(cost.total()) << "\n";
    } else {
      std::cout << ",,,\n";
    }
  };

  if (!observations.empty()) {
    // "y1,y2,..;y1,y2,.." with one group per sensor; H is not drawn.
    JointObservations obs;
    std::stringstream in(observations);
    std::string row;
    while (std::getline(in, row, ';')) obs.push_back(parse_row(row));
    check_observations(scenario, obs);
    emit(0, "", obs, std::nullopt);
    return kExitOk;
  }
  TrajectorySampler sampler(scenario, seed);
  JointObservations obs;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const int h = sampler.draw(obs);
    emit(s, std::to_string(h), obs, h);
  }
  return kExitOk;
}

int cmd_best_response(const ScenarioOptions& so, const ProfileOptions& po, int sensor, bool oracle, int iterate,
                      const std::string& out_dir, double tol) {
  const Scenario scenario = so.load();
  const NamedProfile named = po.load_one(scenario);
  const TabularProfile profile = compile_profile(scenario, named.profile);
  const int i = sensor - 1;
  if (i < 0 || i >= scenario.sensor_count()) throw Error(ErrorKind::kConfig, "--sensor out of range");

  const double before = exact_expected_cost(scenario, profile).expected_cost;
  const BestResponse br = best_response(scenario, profile, i);
  const BestResponse tree = best_response(scenario, profile, i, {false});
  const SufficiencyReport sufficiency = verify_info_state_sufficiency(tree, tol);
  const StructureReport concavity = verify_concavity(br.table, tol);
  const StructureReport intervals = extract_intervals(br.table, tol);
  const bool consistent = std::abs(br.value - br.report.expected_cost) <= 1e-10 * std::max(1.0, std::abs(br.value));

  std::cout << "check,result,detail\n";
  std::cout << "initial_cost," << format_double(before) << ",\n";
  std::cout << "best_response_value," << format_double(br.value) << ",DP root value\n";
  std::cout << "best_response_exact," << format_double(br.report.expected_cost) << ","
            << (consistent ? "matches DP" : "MISMATCH") << "\n";
  std::cout << "info_state_sufficiency," << (sufficiency.pass ? "pass" : "fail") << "," << sufficiency.groups
            << " groups over " << sufficiency.histories << " histories\n";
  std::cout << "concavity," << (concavity.concave() ? "pass" : "fail") << "," << concavity.concavity.size()
            << " violations\n";
  std::cout << "interval_structure," << (intervals.interval_structure() ? "pass" : "fail") << ","
            << intervals.intervals.size() << " violations; " << intervals.scope << "\n";
  bool ok = sufficiency.pass && concavity.concave() && intervals.interval_structure() && consistent;

  if (oracle) {
    const BestResponse bf = brute_force_best_response(scenario, profile, i);
    const double diff = std::abs(bf.value - br.value);
    std::cout << "oracle_brute_force," << format_double(bf.value) << ",difference " << format_double(diff) << "\n";
    ok = ok && diff <= 1e-10;
  }
  if (iterate > 0) {
    const auto result = person_by_person(scenario, br.profile, iterate);
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
      std::cout << "iterate_step_" << k << "," << format_double(result.trace[k]) << ","
                << (k == 0 ? "start" : "after sensor " + std::to_string((k - 1) % scenario.sensor_count() + 1))
                << "\n";
    }
    std::cout << "iterate_rounds," << result.rounds << "," << (result.converged ? "converged" : "round limit")
              << "\n";
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text(out_dir + "/value_table.csv", value_table_csv(br.table));
    write_text(out_dir + "/structure.csv", structure_csv(concavity, intervals));
    write_text(out_dir + "/plot_series.csv", plot_series_csv(br.table));
  }
  return ok ? kExitOk : kExitVerify;
}

int cmd_iterate(const ScenarioOptions& so, const ProfileOptions& po, int rounds, double tol) {
  const Scenario scenario = so.load();
  const NamedProfile named = po.load_one(scenario);
  const auto result = person_by_person(scenario, named.profile, rounds, tol);
  std::cout << "step,round,sensor,cost\n";
  const int n = scenario.sensor_count();
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    if (k == 0) {
      std::cout << "0,0,-," << format_double(result.trace[0]) << "\n";
    } else {
      std::cout << k << "," << (k - 1) / n + 1 << "," << (k - 1) % n + 1 << "," << format_double(result.trace[k])
                << "\n";
    }
  }
  std::cerr << (result.converged ? "converged" : "stopped at the round limit") << " after " << result.rounds
            << " round(s)\n";
  return kExitOk;
}

struct CounterexampleRow {
  CounterexampleCosts closed;
  CounterexampleCosts exact;
  double mismatch = 0.0;
  double gap = 0.0;
};

CounterexampleRow counterexample_row(double K, double r1, double mu) {
  const Scenario scenario =
      mu > 0.0 ? counterexample_scenario(K, r1, mu) : counterexample_scenario(K, r1, std::nullopt);
  CounterexampleRow row;
  row.closed = counterexample_closed_forms(K, r1);
  row.exact.ex1 = exact_expected_cost(scenario, preset_strategies(Preset::kEx1, scenario)).expected_cost;
  row.exact.ex2 = exact_expected_cost(scenario, preset_strategies(Preset::kEx2, scenario)).expected_cost;
  row.exact.non_threshold =
      exact_expected_cost(scenario, preset_strategies(Preset::kNonThreshold, scenario)).expected_cost;
  row.mismatch = std::max({std::abs(row.closed.ex1 - row.exact.ex1), std::abs(row.closed.ex2 - row.exact.ex2),
                           std::abs(row.closed.non_threshold - row.exact.non_threshold)});
  row.gap = std::min(row.exact.ex1, row.exact.ex2) - row.exact.non_threshold;
  return row;
}

int cmd_counterexample(double K, double r1, double mu, bool grid, int steps) {
  constexpr double kTol = 1e-10;
  if (grid) {
    if (steps < 1) throw Error(ErrorKind::kConfig, "--steps must be >= 1");
    std::cout << "K,r1,cost_ex1,cost_ex2,cost_non_threshold,gap\n";
    double worst = 0.0;
    for (double k : {1.1, 1.5, 1.9}) {
      for (int s = 1; s <= steps; ++s) {
        const double r = static_cast<double>(s) / (steps + 1);
        const auto row = counterexample_row(k, r, mu);
        worst = std::max(worst, row.mismatch);
        std::cout << format_double(k) << "," << format_double(r) << "," << format_double(row.exact.ex1) << ","
                  << format_double(row.exact.ex2) << "," << format_double(row.exact.non_threshold) << ","
                  << format_double(row.gap) << "\n";
      }
    }
    if (worst > kTol) {
      std::cerr << "closed forms and enumeration disagree by " << format_double(worst) << "\n";
      return kExitBudget;
    }
    return kExitOk;
  }

  const auto row = counterexample_row(K, r1, mu);
  std::cout << "profile,closed_form,exact,abs_difference\n";
  auto line = [](const char* name, double closed, double exact) {
    std::cout << name << "," << format_double(closed) << "," << format_double(exact) << ","
              << format_double(std::abs(closed - exact)) << "\n";
  };
  line("ex1", row.closed.ex1, row.exact.ex1);
  line("ex2", row.closed.ex2, row.exact.ex2);
  line("non_threshold", row.closed.non_threshold, row.exact.non_threshold);
  std::cout << "gap," << format_double(row.gap) << ",,\n";
  const bool claim_applies = r1 < 2.0 / 3.0;
  std::string verdict = claim_applies ? "non-threshold strictly better" : "no strict improvement required";
  if (claim_applies && !(row.gap > 0.0)) verdict = "claim violated";
  std::cout << "verdict," << verdict << ",,\n";
  if (row.mismatch > kTol) {
    std::cerr << "closed forms and enumeration disagree by " << format_double(row.mismatch) << "\n";
    return kExitBudget;
  }
  return claim_applies && !(row.gap > 0.0) ? kExitVerify : kExitOk;
}

int cmd_validate(const ScenarioOptions& so) {
  const Scenario scenario = so.load();
  std::cout << "field,value\n";
  std::cout << "sensors," << scenario.sensor_count() << "\n";
  std::cout << "horizon," << scenario.horizon() << "\n";
  std::cout << "prior," << format_double(scenario.prior()) << "\n";
  std::cout << "message_alphabet," << scenario.message_alphabet() << "\n";
  for (int j = 0; j < scenario.sensor_count(); ++j) {
    std::cout << "alphabet_sensor_" << j + 1 << "," << scenario.observations().alphabet_size(j) << "\n";
  }
  std::string edges;
  for (const auto& [from, to] : scenario.graph().edges()) {
    edges += (edges.empty() ? "" : " ") + std::to_string(from + 1) + "->" + std::to_string(to + 1);
  }
  std::cout << "edges," << (edges.empty() ? "-" : edges) << "\n";
  std::cout << "status,valid\n";
  return kExitOk;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kBudgetExceeded:
      return kExitBudget;
    default:
      return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential decentralized detection with signaling"};
  app.require_subcommand(1);

  ScenarioOptions eval_scenario, sim_scenario, br_scenario, it_scenario, val_scenario;
  ProfileOptions eval_profiles, sim_profile, br_profile, it_profile;

  auto* evaluate = app.add_subcommand("evaluate", "Expected cost of one or more profiles");
  eval_scenario.add(*evaluate);
  eval_profiles.add(*evaluate, true);
  std::string method = "exact";
  std::uint64_t samples = 100000, seed = 1;
  evaluate->add_option("--method", method, "exact, mc or both")->capture_default_str();
  evaluate->add_option("--samples", samples, "Monte Carlo samples")->capture_default_str();
  evaluate->add_option("--seed", seed, "Monte Carlo seed")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Per-trajectory rollouts");
  sim_scenario.add(*simulate);
  sim_profile.add(*simulate, false);
  std::uint64_t sim_samples = 10, sim_seed = 1;
  std::string observations;
  simulate->add_option("--samples", sim_samples, "Trajectories to draw")->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Sampling seed")->capture_default_str();
  simulate->add_option("--observations", observations, "Fixed observations, e.g. \"0,1,1;0,1,1\" (one group per sensor)");

  auto* best = app.add_subcommand("best-response", "Best response of one sensor plus structural checks");
  br_scenario.add(*best);
  br_profile.add(*best, false);
  int sensor = 1, iterate = 0;
  bool oracle = false;
  std::string out_dir;
  double br_tol = 1e-9;
  best->add_option("--sensor", sensor, "Sensor to optimise (1-based)")->capture_default_str();
  best->add_flag("--oracle", oracle, "Compare against exhaustive search");
  best->add_option("--iterate", iterate, "Append a person-by-person trace with this many rounds");
  best->add_option("--out-dir", out_dir, "Write value_table.csv, structure.csv and plot_series.csv here");
  best->add_option("--tol", br_tol, "Verifier tolerance")->capture_default_str();

  auto* iter = app.add_subcommand("iterate", "Person-by-person iteration");
  it_scenario.add(*iter);
  it_profile.add(*iter, false);
  int rounds = 10;
  double it_tol = 1e-10;
  iter->add_option("--rounds", rounds, "Maximum rounds")->capture_default_str();
  iter->add_option("--tol", it_tol, "Stop when a round improves by less than this")->capture_default_str();

  auto* counter = app.add_subcommand("counterexample", "Closed forms vs enumeration for the three preset rules");
  double K = 1.5, r1 = 0.4, mu = 100.0;
  bool grid = false;
  int steps = 19;
  counter->add_option("--K", K, "Joint operating cost, 1 < K < 2")->capture_default_str();
  counter->add_option("--r1", r1, "Signal probability at t=1")->capture_default_str();
  counter->add_option("--mu", mu, "Error cost")->capture_default_str();
  counter->add_flag("--grid", grid, "Sweep K in {1.1,1.5,1.9} and r1 over a uniform grid");
  counter->add_option("--steps", steps, "Interior r1 grid points")->capture_default_str();

  auto* scenario_cmd = app.add_subcommand("scenario", "Scenario utilities");
  scenario_cmd->require_subcommand(1);
  auto* validate = scenario_cmd->add_subcommand("validate", "Load and validate a scenario");
  val_scenario.add(*validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*evaluate) return cmd_evaluate(eval_scenario, eval_profiles, method, samples, seed);
    if (*simulate) return cmd_simulate(sim_scenario, sim_profile, sim_samples, sim_seed, observations);
    if (*best) return cmd_best_response(br_scenario, br_profile, sensor, oracle, iterate, out_dir, br_tol);
    if (*iter) return cmd_iterate(it_scenario, it_profile, rounds, it_tol);
    if (*counter) return cmd_counterexample(K, r1, mu, grid, steps);
    if (*validate) return cmd_validate(val_scenario);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
