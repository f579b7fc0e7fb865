#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "subterra/demand.hpp"
#include "subterra/network.hpp"
#include "subterra/vrp.hpp"

namespace subterra::sim {

struct LinkTraversal {
  std::string link_id;
  Seconds enter_s = 0;
  Seconds exit_s = 0;
};

struct RealizedActivity {
  std::string job_id;
  vrp::ActivityKind kind = vrp::ActivityKind::service;
  std::string node;
  Seconds arrival_s = 0;
  Seconds op_s = 0;        // operation start: waits until window open
  Seconds departure_s = 0;
  Seconds lateness_s = 0;  // recorded, never repaired
};

struct TourExecution {
  std::string tour_id;
  std::string vehicle_type;
  net::Mode mode = net::Mode::road;
  std::string start_node;
  Seconds start_s = 0;
  Seconds end_s = 0;
  Meters total_m = 0;
  Seconds total_s = 0;
  int initial_load = 0;
  int capacity = 0;
  std::vector<LinkTraversal> links;
  std::vector<RealizedActivity> activities;
};

struct LinkLoadKey {
  std::string link_id;
  int hour = 0;
  std::string vehicle_type;

  auto operator<=>(const LinkLoadKey&) const = default;
};

using LinkLoads = std::map<LinkLoadKey, int>;

struct DepartureRecord {
  std::string hub_id;
  std::string tour_id;
  Seconds departure_s = 0;
  int parcels = 0;
};

// A plan with its jobs and solved tours; the executor needs the jobs for time
// windows and service durations.
struct SolvedPlan {
  std::string plan_id;
  std::string carrier_id;
  std::vector<vrp::Job> jobs;
  vrp::Solution solution;
};

struct ExecutionResult {
  std::vector<TourExecution> executions;
  LinkLoads link_loads;
};

// Re-route every tour leg-by-leg with time-dependent shortest paths at the
// realized departure instants. The tour starts at its planned start; link
// loads accumulate by entry hour and vehicle type.
ExecutionResult execute(const std::vector<SolvedPlan>& plans, const net::Network& network);

// One record per tour that starts at a hub node, with its realized start and
// initial onboard parcels.
std::vector<DepartureRecord> extract_departures(const std::vector<TourExecution>& executions,
                                                const std::vector<demand::Hub>& hubs);

// variant - base per (link, hour, vehicle type); keys absent on one side count
// as zero. The union of keys is returned, zero deltas included.
std::map<LinkLoadKey, int> diff_link_loads(const LinkLoads& base, const LinkLoads& variant);

// executions.csv: tour_id,vehicle_type,start_s,end_s,total_m,total_s
void write_executions_csv(const std::vector<TourExecution>& executions, const std::string& path);
struct ExecutionRow {
  std::string tour_id;
  std::string vehicle_type;
  Seconds start_s = 0;
  Seconds end_s = 0;
  Meters total_m = 0;
  Seconds total_s = 0;
};
std::vector<ExecutionRow> read_executions_csv(const std::string& path);

// link_loads.csv: link_id,hour,vehicle_type,count
void write_link_loads_csv(const LinkLoads& loads, const std::string& path);
LinkLoads read_link_loads_csv(const std::string& path);

// departures.csv: hub_id,tour_id,departure_s,parcels
void write_departures_csv(const std::vector<DepartureRecord>& departures, const std::string& path);
std::vector<DepartureRecord> read_departures_csv(const std::string& path);

}  // namespace subterra::sim
