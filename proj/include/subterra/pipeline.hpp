#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subterra/citygen.hpp"
#include "subterra/kpi.hpp"
#include "subterra/scenario.hpp"
#include "subterra/shuttle.hpp"
#include "subterra/sim.hpp"
#include "subterra/vrp.hpp"

namespace subterra::pipeline {

// Single JSON run configuration; unknown keys are rejected so experiment
// configs cannot silently typo an option.
struct RunConfig {
  std::uint64_t seed = 42;
  int replications = 3;
  std::vector<scenario::ScenarioKind> scenarios = {
      scenario::ScenarioKind::BC, scenario::ScenarioKind::SHU, scenario::ScenarioKind::WHU,
      scenario::ScenarioKind::WHU_B};
  std::string output_dir = "out";

  bool use_city_generator = true;
  citygen::CityConfig city;
  // External inputs when use_city_generator is false.
  std::string nodes_csv, links_csv, profiles_csv, demand_json;

  vrp::SolverParams solver;
  scenario::ScenarioParams scenario_params;
  int shuttle_carriers = 4;

  static RunConfig from_json(const std::string& text);
  static RunConfig from_json_file(const std::string& path);
};

// Artifact layout under output_dir:
//   city/{nodes,links,speed_profiles}.csv, demand.json
//   <scenario>/rep_<r>/plans.json, solutions/<plan>.json,
//     executions.csv, link_loads.csv, departures.csv, tour_lengths.csv,
//     shuttle_shipments.csv, shuttle_solutions/<carrier>.json,
//     shuttle_executions.csv, shuttle_link_loads.csv, shuttle_violations.csv,
//     kpi_report.json
//   <scenario>/kpi_mean.json
//   comparison.csv
struct Paths {
  std::string root;

  std::string city_dir() const { return root + "/city"; }
  std::string demand_file() const { return root + "/demand.json"; }
  std::string scenario_dir(scenario::ScenarioKind k) const;
  std::string rep_dir(scenario::ScenarioKind k, int rep) const;
  std::string mean_file(scenario::ScenarioKind k) const;
  std::string comparison_file() const { return root + "/comparison.csv"; }
};

// Every stage reads only persisted intermediates and writes its own, so each
// subcommand is re-runnable from the artifact tree.
void stage_generate(const RunConfig& cfg);
void stage_plan(const RunConfig& cfg, scenario::ScenarioKind kind, int rep);
void stage_simulate(const RunConfig& cfg, scenario::ScenarioKind kind, int rep);
void stage_shuttle(const RunConfig& cfg, scenario::ScenarioKind kind, int rep);
kpi::KpiReport stage_report(const RunConfig& cfg, scenario::ScenarioKind kind, int rep);
// Written once per scenario when every replication report exists.
bool write_scenario_mean(const RunConfig& cfg, scenario::ScenarioKind kind);

// Full pipeline for every configured scenario and replication; writes
// comparison.csv across scenario means. Returns 0 on success.
int run_all(const RunConfig& cfg);

// Helpers shared by stages and tests.
net::Network load_city_network(const RunConfig& cfg);
std::vector<vrp::Job> build_vrp_jobs(const scenario::CarrierPlan& plan);
std::vector<sim::SolvedPlan> load_solved_plans(const std::string& rep_dir,
                                               const std::vector<scenario::CarrierPlan>& plans);
std::uint64_t plan_seed(const RunConfig& cfg, int rep, const std::string& plan_id);

}  // namespace subterra::pipeline
