#include "subterra/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace subterra::pipeline {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

class StageLog {
 public:
  StageLog(std::string stage, std::string scenario = "", int rep = -1)
      : stage_(std::move(stage)), scenario_(std::move(scenario)), rep_(rep),
        begin_(std::chrono::steady_clock::now()) {}

  void field(const std::string& key, const std::string& value) { extra_ += " " + key + "=" + value; }
  void field(const std::string& key, double value) { field(key, format_double(value)); }
  void field(const std::string& key, long long value) { field(key, std::to_string(value)); }

  ~StageLog() {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - begin_)
                  .count();
    std::string line = "[subterra] stage=" + stage_;
    if (!scenario_.empty()) line += " scenario=" + scenario_;
    if (rep_ >= 0) line += " rep=" + std::to_string(rep_);
    line += " wall_ms=" + std::to_string(ms) + extra_;
    std::fprintf(stdout, "%s\n", line.c_str());
    std::fflush(stdout);
  }

 private:
  std::string stage_, scenario_, extra_;
  int rep_;
  std::chrono::steady_clock::time_point begin_;
};

void reject_unknown_keys(const ordered_json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw std::runtime_error("config: unknown key '" + where + it.key() + "'");
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string Paths::scenario_dir(scenario::ScenarioKind k) const {
  return root + "/" + scenario::scenario_name(k);
}

std::string Paths::rep_dir(scenario::ScenarioKind k, int rep) const {
  return scenario_dir(k) + "/rep_" + std::to_string(rep);
}

std::string Paths::mean_file(scenario::ScenarioKind k) const {
  return scenario_dir(k) + "/kpi_mean.json";
}

RunConfig RunConfig::from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text);
  RunConfig cfg;

  reject_unknown_keys(doc, "", {"seed", "replications", "scenarios", "output_dir", "city",
                                "network", "solver", "scenario_params", "shuttle"});

  if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("replications")) cfg.replications = doc["replications"];
  if (cfg.replications < 1) throw std::runtime_error("config: replications must be >= 1");
  if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"];

  if (doc.contains("scenarios")) {
    cfg.scenarios.clear();
    for (const auto& s : doc["scenarios"])
      cfg.scenarios.push_back(scenario::parse_scenario(s.get<std::string>()));
    if (cfg.scenarios.empty()) throw std::runtime_error("config: scenarios list is empty");
  }

  if (doc.contains("city")) {
    const auto& c = doc["city"];
    reject_unknown_keys(c, "city.",
                        {"grid_nx", "grid_ny", "spacing_m", "road_speed_mps", "bike_speed_mps",
                         "tunnel_speed_mps", "bike_halfwidth", "demand_sigma_m",
                         "hub_daily_capacity", "total_parcels", "parcel_size_min",
                         "parcel_size_max", "carrier_count", "hub_connected_count",
                         "hourly_speed_factor", "facilities"});
    auto& city = cfg.city;
    if (c.contains("grid_nx")) city.grid_nx = c["grid_nx"];
    if (c.contains("grid_ny")) city.grid_ny = c["grid_ny"];
    if (c.contains("spacing_m")) city.spacing_m = c["spacing_m"];
    if (c.contains("road_speed_mps")) city.road_speed_mps = c["road_speed_mps"];
    if (c.contains("bike_speed_mps")) city.bike_speed_mps = c["bike_speed_mps"];
    if (c.contains("tunnel_speed_mps")) city.tunnel_speed_mps = c["tunnel_speed_mps"];
    if (c.contains("bike_halfwidth")) city.bike_halfwidth = c["bike_halfwidth"];
    if (c.contains("demand_sigma_m")) city.demand_sigma_m = c["demand_sigma_m"];
    if (c.contains("hub_daily_capacity")) city.hub_daily_capacity = c["hub_daily_capacity"];
    if (c.contains("total_parcels")) city.total_parcels = c["total_parcels"];
    if (c.contains("parcel_size_min")) city.parcel_size_min = c["parcel_size_min"];
    if (c.contains("parcel_size_max")) city.parcel_size_max = c["parcel_size_max"];
    if (c.contains("carrier_count")) city.carrier_count = c["carrier_count"];
    if (c.contains("hub_connected_count")) city.hub_connected_count = c["hub_connected_count"];
    if (c.contains("hourly_speed_factor")) {
      const auto& arr = c["hourly_speed_factor"];
      if (arr.size() != 24) throw std::runtime_error("config: hourly_speed_factor needs 24 values");
      for (int h = 0; h < 24; ++h) city.hourly_speed_factor[h] = arr[h];
    }
    if (c.contains("facilities")) {
      city.facilities.clear();
      for (const auto& f : c["facilities"]) {
        reject_unknown_keys(f, "city.facilities[].",
                            {"id", "kind", "daily_supply", "fx", "fy", "tunnel"});
        citygen::FacilitySpec spec;
        spec.id = f.at("id");
        spec.kind = demand::parse_facility_kind(f.at("kind"));
        spec.daily_supply = f.at("daily_supply");
        spec.fx = f.at("fx");
        spec.fy = f.at("fy");
        spec.tunnel = f.at("tunnel");
        city.facilities.push_back(std::move(spec));
      }
    }
  }

  if (doc.contains("network")) {
    const auto& n = doc["network"];
    reject_unknown_keys(n, "network.", {"nodes", "links", "speed_profiles", "demand"});
    cfg.use_city_generator = false;
    cfg.nodes_csv = n.at("nodes");
    cfg.links_csv = n.at("links");
    if (n.contains("speed_profiles")) cfg.profiles_csv = n["speed_profiles"];
    cfg.demand_json = n.at("demand");
  }

  if (doc.contains("solver")) {
    const auto& s = doc["solver"];
    reject_unknown_keys(s, "solver.",
                        {"iterations", "ruin_fraction", "window_penalty_per_s",
                         "unassigned_penalty"});
    if (s.contains("iterations")) cfg.solver.iterations = s["iterations"];
    if (s.contains("ruin_fraction")) cfg.solver.ruin_fraction = s["ruin_fraction"];
    if (s.contains("window_penalty_per_s"))
      cfg.solver.window_penalty_per_s = s["window_penalty_per_s"];
    if (s.contains("unassigned_penalty")) cfg.solver.unassigned_penalty = s["unassigned_penalty"];
  }

  if (doc.contains("scenario_params")) {
    const auto& s = doc["scenario_params"];
    reject_unknown_keys(s, "scenario_params.",
                        {"bike_radius_m", "shu_allotment_parcels", "fleet_slack",
                         "vehicle_earliest_start_s", "vehicle_stagger_s",
                         "vehicle_start_window_s"});
    if (s.contains("bike_radius_m")) cfg.scenario_params.bike_radius_m = s["bike_radius_m"];
    if (s.contains("shu_allotment_parcels"))
      cfg.scenario_params.shu_allotment_parcels = s["shu_allotment_parcels"];
    if (s.contains("fleet_slack")) cfg.scenario_params.fleet_slack = s["fleet_slack"];
    if (s.contains("vehicle_earliest_start_s"))
      cfg.scenario_params.vehicle_earliest_start_s = s["vehicle_earliest_start_s"];
    if (s.contains("vehicle_stagger_s"))
      cfg.scenario_params.vehicle_stagger_s = s["vehicle_stagger_s"];
    if (s.contains("vehicle_start_window_s"))
      cfg.scenario_params.vehicle_start_window_s = s["vehicle_start_window_s"];
  }

  if (doc.contains("shuttle")) {
    const auto& s = doc["shuttle"];
    reject_unknown_keys(s, "shuttle.", {"carriers"});
    if (s.contains("carriers")) cfg.shuttle_carriers = s["carriers"];
    if (cfg.shuttle_carriers < 1) throw std::runtime_error("config: shuttle.carriers must be >= 1");
  }

  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) { return from_json(slurp(path)); }

net::Network load_city_network(const RunConfig& cfg) {
  Paths paths{cfg.output_dir};
  std::string dir = paths.city_dir();
  return net::Network::load(dir + "/nodes.csv", dir + "/links.csv", dir + "/speed_profiles.csv");
}

std::uint64_t plan_seed(const RunConfig& cfg, int rep, const std::string& plan_id) {
  // No scenario in the derivation: identical sub-problems (e.g. the truck
  // supply plans of SHU/WHU/WHU-B or unconnected carriers) solve identically.
  return derive_seed(derive_seed(cfg.seed, "solve", static_cast<std::uint64_t>(rep)), plan_id);
}

void stage_generate(const RunConfig& cfg) {
  StageLog log("generate");
  Paths paths{cfg.output_dir};
  fs::create_directories(paths.city_dir());

  demand::DemandSet ds;
  if (cfg.use_city_generator) {
    citygen::City city = citygen::build_city(cfg.city);
    city.network.write_csv(paths.city_dir());
    ds = demand::generate_demand(city.demand_config, cfg.seed);
    log.field("nodes", static_cast<long long>(city.network.nodes().size()));
    log.field("links", static_cast<long long>(city.network.links().size()));
  } else {
    net::Network network = net::Network::load(cfg.nodes_csv, cfg.links_csv, cfg.profiles_csv);
    network.write_csv(paths.city_dir());
    ds = demand::load_demand(cfg.demand_json);
    log.field("nodes", static_cast<long long>(network.nodes().size()));
    log.field("links", static_cast<long long>(network.links().size()));
  }
  demand::save_demand(ds, paths.demand_file());
  log.field("parcel_jobs", static_cast<long long>(ds.parcel_jobs.size()));
  log.field("parcels", static_cast<long long>(ds.total_parcels()));
  log.field("supply_jobs", static_cast<long long>(ds.supply_jobs.size()));
}

std::vector<vrp::Job> build_vrp_jobs(const scenario::CarrierPlan& plan) {
  bool has_bikes = false;
  for (const auto& e : plan.fleet)
    if (e.type.mode == net::Mode::bike) has_bikes = true;

  std::vector<vrp::Job> jobs;
  for (const auto& s : plan.services) {
    vrp::Job j;
    j.id = s.job_id;
    j.kind = vrp::JobKind::service;
    j.location = s.node;
    j.size = s.size;
    if (has_bikes && !s.bike_eligible) j.allowed_modes = {net::Mode::road};
    jobs.push_back(std::move(j));
  }
  return jobs;
}

namespace {

vrp::MatrixSet plan_matrices(const scenario::CarrierPlan& plan, const net::Network& network) {
  std::set<std::string> locations;
  for (const auto& e : plan.fleet) locations.insert(e.start_location);
  for (const auto& s : plan.services) locations.insert(s.node);
  std::vector<std::string> locs(locations.begin(), locations.end());

  std::set<net::Mode> modes;
  for (const auto& e : plan.fleet) modes.insert(e.type.mode);

  vrp::MatrixSet mats;
  for (net::Mode mode : modes) {
    if (mode == net::Mode::bike) {
      // Customers outside the bike subgraph stay reachable by van only.
      mats.by_mode.emplace(mode, network.travel_time_matrix_partial(locs, mode));
    } else {
      mats.by_mode.emplace(mode, network.travel_time_matrix(locs, mode));
    }
  }
  return mats;
}

scenario::HubAllocation make_allocation(scenario::ScenarioKind kind, const demand::DemandSet& ds,
                                        const net::Network& network, const RunConfig& cfg) {
  switch (kind) {
    case scenario::ScenarioKind::BC: return {};
    case scenario::ScenarioKind::SHU: return allocate_shu(ds, network, cfg.scenario_params);
    case scenario::ScenarioKind::WHU:
    case scenario::ScenarioKind::WHU_B: return allocate_whu(ds, network, cfg.scenario_params);
  }
  return {};
}

}  // namespace

void stage_plan(const RunConfig& cfg, scenario::ScenarioKind kind, int rep) {
  StageLog log("plan", scenario::scenario_name(kind), rep);
  Paths paths{cfg.output_dir};
  net::Network network = load_city_network(cfg);
  demand::DemandSet ds = demand::load_demand(paths.demand_file());

  auto allocation = make_allocation(kind, ds, network, cfg);
  auto plans = scenario::build_carrier_plans(kind, ds, allocation, network, cfg.scenario_params);

  std::string dir = paths.rep_dir(kind, rep);
  fs::create_directories(dir + "/solutions");
  scenario::save_plans(plans, dir + "/plans.json");

  // Carrier problems are independent with per-plan derived seeds, so they can
  // solve concurrently; results are committed in plan order.
  std::vector<vrp::Solution> solutions(plans.size());
  parallel_for_index(plans.size(), [&](std::size_t i) {
    const auto& plan = plans[i];
    auto jobs = build_vrp_jobs(plan);
    auto mats = plan_matrices(plan, network);
    vrp::SolverParams params = cfg.solver;
    params.seed = plan_seed(cfg, rep, plan.id);
    solutions[i] = vrp::solve(jobs, plan.fleet, mats, params);
  });

  long long tours = 0, unassigned = 0;
  double cost = 0;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& plan = plans[i];
    vrp::Solution& sol = solutions[i];
    for (auto& tour : sol.tours) tour.id = plan.id + "#" + tour.id;
    vrp::save_solution(plan.id, plan.carrier_id, sol, dir + "/solutions/" + plan.id + ".json");
    tours += static_cast<long long>(sol.tours.size());
    unassigned += static_cast<long long>(sol.unassigned.size());
    cost += sol.total_cost;
  }
  log.field("plans", static_cast<long long>(plans.size()));
  log.field("tours", tours);
  log.field("unassigned", unassigned);
  log.field("cost", cost);
}

std::vector<sim::SolvedPlan> load_solved_plans(const std::string& rep_dir,
                                               const std::vector<scenario::CarrierPlan>& plans) {
  std::vector<sim::SolvedPlan> solved;
  for (const auto& plan : plans) {
    sim::SolvedPlan sp;
    sp.plan_id = plan.id;
    sp.carrier_id = plan.carrier_id;
    sp.jobs = build_vrp_jobs(plan);
    sp.solution = vrp::load_solution(rep_dir + "/solutions/" + plan.id + ".json");
    solved.push_back(std::move(sp));
  }
  return solved;
}

void stage_simulate(const RunConfig& cfg, scenario::ScenarioKind kind, int rep) {
  StageLog log("simulate", scenario::scenario_name(kind), rep);
  Paths paths{cfg.output_dir};
  net::Network network = load_city_network(cfg);
  demand::DemandSet ds = demand::load_demand(paths.demand_file());
  std::string dir = paths.rep_dir(kind, rep);

  auto plans = scenario::load_plans(dir + "/plans.json");
  auto solved = load_solved_plans(dir, plans);
  auto result = sim::execute(solved, network);

  sim::write_executions_csv(result.executions, dir + "/executions.csv");
  sim::write_link_loads_csv(result.link_loads, dir + "/link_loads.csv");
  auto departures = sim::extract_departures(result.executions, ds.hubs);
  sim::write_departures_csv(departures, dir + "/departures.csv");
  kpi::write_tour_lengths_csv(kpi::tour_length_table(result.executions),
                              dir + "/tour_lengths.csv");

  double km = 0;
  for (const auto& ex : result.executions) km += ex.total_m / 1000.0;
  log.field("tours", static_cast<long long>(result.executions.size()));
  log.field("km", km);
  log.field("departures", static_cast<long long>(departures.size()));
}

void stage_shuttle(const RunConfig& cfg, scenario::ScenarioKind kind, int rep) {
  if (kind == scenario::ScenarioKind::BC)
    throw std::invalid_argument("shuttle stage: the basecase has no shuttle");
  StageLog log("shuttle", scenario::scenario_name(kind), rep);
  Paths paths{cfg.output_dir};
  net::Network network = load_city_network(cfg);
  demand::DemandSet ds = demand::load_demand(paths.demand_file());
  std::string dir = paths.rep_dir(kind, rep);

  auto plans = scenario::load_plans(dir + "/plans.json");
  auto solved = load_solved_plans(dir, plans);
  auto departures = sim::read_departures_csv(dir + "/departures.csv");

  shuttle::DeriveContext ctx;
  ctx.demand = &ds;
  ctx.network = &network;
  ctx.shuttle_capacity = vrp::freight_shuttle().capacity;
  for (const auto& sp : solved) {
    std::map<std::string, const scenario::PlanService*> service_of;
    for (const auto& plan : plans)
      if (plan.id == sp.plan_id)
        for (const auto& s : plan.services) service_of[s.job_id] = &s;
    for (const auto& tour : sp.solution.tours)
      for (const auto& act : tour.activities) {
        auto it = service_of.find(act.job_id);
        if (it != service_of.end())
          ctx.tour_carrier_parcels[tour.id][it->second->carrier_id] += it->second->size;
      }
  }

  auto shipments = shuttle::derive_shipments(departures, ds.supply_jobs, kind, ctx);
  shuttle::write_shipments_csv(shipments, dir + "/shuttle_shipments.csv");

  auto partitions = shuttle::partition_carriers(shipments, cfg.shuttle_carriers);
  vrp::SolverParams params = cfg.solver;
  params.seed = derive_seed(cfg.seed, "shuttle-stage", static_cast<std::uint64_t>(rep));
  auto run = shuttle::plan_and_execute(partitions, network, params);

  fs::create_directories(dir + "/shuttle_solutions");
  for (const auto& sp : run.plans)
    vrp::save_solution(sp.plan_id, sp.carrier_id, sp.solution,
                       dir + "/shuttle_solutions/" + sp.plan_id + ".json");
  sim::write_executions_csv(run.execution.executions, dir + "/shuttle_executions.csv");
  sim::write_link_loads_csv(run.execution.link_loads, dir + "/shuttle_link_loads.csv");
  shuttle::write_violations_csv(run.violations, dir + "/shuttle_violations.csv");

  double km = 0;
  for (const auto& ex : run.execution.executions) km += ex.total_m / 1000.0;
  log.field("shipments", static_cast<long long>(shipments.size()));
  log.field("shuttles", static_cast<long long>(run.execution.executions.size()));
  log.field("km", km);
  log.field("violations", static_cast<long long>(run.violations.size()));
  log.field("window_penalty", run.window_penalty);
}

namespace {

std::vector<sim::TourExecution> executions_from_rows(const std::vector<sim::ExecutionRow>& rows) {
  std::vector<sim::TourExecution> out;
  for (const auto& r : rows) {
    sim::TourExecution ex;
    ex.tour_id = r.tour_id;
    ex.vehicle_type = r.vehicle_type;
    ex.start_s = r.start_s;
    ex.end_s = r.end_s;
    ex.total_m = r.total_m;
    ex.total_s = r.total_s;
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<sim::SolvedPlan> load_shuttle_plans(const std::string& dir) {
  std::vector<sim::SolvedPlan> solved;
  std::string sol_dir = dir + "/shuttle_solutions";
  if (!fs::exists(sol_dir)) return solved;
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(sol_dir)) files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    sim::SolvedPlan sp;
    sp.solution = vrp::load_solution(f, &sp.plan_id, &sp.carrier_id);
    solved.push_back(std::move(sp));
  }
  return solved;
}

}  // namespace

kpi::KpiReport stage_report(const RunConfig& cfg, scenario::ScenarioKind kind, int rep) {
  StageLog log("report", scenario::scenario_name(kind), rep);
  Paths paths{cfg.output_dir};
  std::string dir = paths.rep_dir(kind, rep);

  auto executions = executions_from_rows(sim::read_executions_csv(dir + "/executions.csv"));
  auto plans = scenario::load_plans(dir + "/plans.json");
  auto solved = load_solved_plans(dir, plans);

  if (kind != scenario::ScenarioKind::BC) {
    auto shuttle_ex =
        executions_from_rows(sim::read_executions_csv(dir + "/shuttle_executions.csv"));
    executions.insert(executions.end(), shuttle_ex.begin(), shuttle_ex.end());
    auto shuttle_plans = load_shuttle_plans(dir);
    solved.insert(solved.end(), shuttle_plans.begin(), shuttle_plans.end());
  }

  kpi::EmissionFactors factors;
  auto report = kpi::build_report(scenario::scenario_name(kind), executions, solved, factors);
  kpi::save_report(report, dir + "/kpi_report.json");

  log.field("total_km", report.total_distance_km);
  log.field("co2_t", report.co2_total_t);
  log.field("ground_load", report.average_ground_vehicle_load);
  return report;
}

bool write_scenario_mean(const RunConfig& cfg, scenario::ScenarioKind kind) {
  Paths paths{cfg.output_dir};
  std::vector<kpi::KpiReport> reports;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    std::string f = paths.rep_dir(kind, rep) + "/kpi_report.json";
    if (!fs::exists(f)) return false;
    reports.push_back(kpi::load_report(f));
  }
  kpi::save_report(kpi::aggregate_replications(reports), paths.mean_file(kind));
  return true;
}

int run_all(const RunConfig& cfg) {
  StageLog log("run");
  stage_generate(cfg);
  Paths paths{cfg.output_dir};

  std::vector<kpi::KpiReport> means;
  for (scenario::ScenarioKind kind : cfg.scenarios) {
    for (int rep = 0; rep < cfg.replications; ++rep) {
      stage_plan(cfg, kind, rep);
      stage_simulate(cfg, kind, rep);
      if (kind != scenario::ScenarioKind::BC) stage_shuttle(cfg, kind, rep);
      stage_report(cfg, kind, rep);
    }
    if (!write_scenario_mean(cfg, kind))
      throw std::runtime_error("run: missing replication reports for scenario mean");
    means.push_back(kpi::load_report(paths.mean_file(kind)));
  }
  if (means.size() > 1) kpi::write_comparison_csv(means, paths.comparison_file());
  log.field("scenarios", static_cast<long long>(means.size()));
  log.field("replications", static_cast<long long>(cfg.replications));
  return 0;
}

}  // namespace subterra::pipeline
