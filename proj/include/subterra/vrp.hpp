#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subterra/common.hpp"
#include "subterra/network.hpp"

namespace subterra::vrp {

struct VehicleType {
  std::string name;
  Money cost_per_meter = 0;
  Money cost_per_second = 0;
  Money fixed_cost = 0;
  int capacity = 1;
  net::Mode mode = net::Mode::road;
};

// Canonical vehicle parameters (costs in currency, capacity in parcels).
const VehicleType& cep_vehicle();      // 0.00037, 0.0063, 48.8, 230, road
const VehicleType& cep_cargo_bike();   // 0.000103, 0.0033, 3.27, 23, bike
const VehicleType& supply_truck();     // 0.00086, 0.008, 140.0, 800, road
const VehicleType& freight_shuttle();  // 0.00035, 0.002, 30.0, 140, tunnel
const VehicleType& vehicle_type_by_name(const std::string& name);

struct TimeWindow {
  Seconds earliest = 0;
  Seconds latest = 0;
};

enum class JobKind { service, shipment };

struct Job {
  std::string id;
  JobKind kind = JobKind::service;
  std::string location;         // service location / shipment delivery location
  std::string pickup_location;  // shipments only
  int size = 1;
  std::optional<TimeWindow> window;         // service window / shipment delivery window
  std::optional<TimeWindow> pickup_window;  // shipments only
  Seconds service_duration_s = 0;
  std::vector<net::Mode> allowed_modes;     // empty: any vehicle mode may serve it
};

// A pool of identical vehicles of one type at one start location. Vehicle k of
// the pool may not start before earliest_start_s + k * start_stagger_s; with a
// start_cycle_s the offsets wrap, dispatching the pool in waves instead of an
// ever-later tail.
struct FleetEntry {
  VehicleType type;
  std::string start_location;
  int count = 1;
  Seconds earliest_start_s = 0;
  Seconds start_stagger_s = 0;
  Seconds start_cycle_s = 0;  // 0: no wrap

  Seconds vehicle_earliest(int vehicle_index) const {
    Seconds offset = vehicle_index * start_stagger_s;
    if (start_cycle_s > 0 && offset >= start_cycle_s) {
      offset = offset - static_cast<long long>(offset / start_cycle_s) * start_cycle_s;
    }
    return earliest_start_s + offset;
  }
};

enum class ActivityKind { service, pickup, delivery };

const char* activity_kind_name(ActivityKind k);
ActivityKind parse_activity_kind(const std::string& s);

struct Activity {
  std::string job_id;
  ActivityKind kind = ActivityKind::service;
  std::string location;
  Seconds arrival_s = 0;    // physical arrival
  Seconds departure_s = 0;  // operation end: max(arrival, window open) + service duration
  int load_after = 0;       // onboard parcels after the activity
};

struct Tour {
  std::string id;
  std::string vehicle_type;
  net::Mode mode = net::Mode::road;
  std::string start_location;
  int fleet_entry = 0;
  int vehicle_index = 0;
  Seconds start_s = 0;
  Seconds end_s = 0;
  int initial_load = 0;  // parcels on board at tour start (services board here)
  int capacity = 0;
  Meters planned_meters = 0;
  std::vector<Activity> activities;
};

struct UnassignedJob {
  std::string job_id;
  std::string reason;
};

struct SolverParams {
  std::uint64_t seed = 0;
  int iterations = 2000;
  double ruin_fraction = 0.2;             // share of jobs removed per ruin
  Money window_penalty_per_s = 10.0;      // per second of lateness
  Money unassigned_penalty = 10000.0;     // per unassigned job
};

struct Solution {
  std::vector<Tour> tours;
  std::vector<UnassignedJob> unassigned;
  Money route_cost = 0;    // fixed + distance + time over all tours
  Money penalty_cost = 0;  // window lateness + unassigned penalties
  Money total_cost = 0;    // route_cost + penalty_cost
  // Rates stamped by the solver so recomputation is self-contained.
  Money window_penalty_per_s = 10.0;
  Money unassigned_penalty = 10000.0;
};

// Per-mode matrices over one shared location list.
struct MatrixSet {
  std::map<net::Mode, net::TravelTimeMatrix> by_mode;

  const net::TravelTimeMatrix& for_mode(net::Mode m) const;
  const std::vector<std::string>& locations() const;
  static MatrixSet single(net::TravelTimeMatrix m, net::Mode mode);
};

struct TourCost {
  std::string tour_id;
  Money fixed = 0;
  Money distance = 0;
  Money time = 0;
  Money window_penalty = 0;
  Money total() const { return fixed + distance + time + window_penalty; }
};

struct RouteCostResult {
  std::vector<TourCost> tours;
  Money route_cost = 0;        // fixed + distance + time
  Money window_penalty = 0;
  Money unassigned_penalty = 0;
  Money total = 0;             // route_cost + penalties
};

// Recompute all costs of a solution from the matrix and the rates stamped in
// it: fixed + meters x cost/m + (end - start) x cost/s per used vehicle, plus
// window and unassigned penalties. The jobs supply windows and service
// durations for the schedule recomputation.
RouteCostResult route_cost(const Solution& solution, const MatrixSet& matrices,
                           const std::vector<Job>& jobs);

// Regret-2 insertion construction followed by a ruin-and-recreate improvement
// loop (alternating random and radial ruin, greedy re-insertion, accept
// strictly better). Capacity and pickup-before-delivery are hard; time windows
// are soft and penalized per params. Deterministic in (inputs, seed).
Solution solve(const std::vector<Job>& jobs, const std::vector<FleetEntry>& fleet,
               const MatrixSet& matrices, const SolverParams& params);

// Exhaustive oracle for desk-scale instances (<= 8 jobs): enumerates job ->
// vehicle assignments (including leaving jobs unassigned) with optimal
// per-vehicle activity orders. Same objective as solve(). Refuses instances
// whose enumeration would be too large.
Solution brute_force(const std::vector<Job>& jobs, const std::vector<FleetEntry>& fleet,
                     const MatrixSet& matrices, const SolverParams& params);

enum class ViolationKind { capacity, precedence, time_window };

struct Violation {
  ViolationKind kind = ViolationKind::capacity;
  std::string tour_id;
  std::string job_id;
  double magnitude = 0;  // parcels over capacity, or seconds early/late
  bool early = false;    // time_window only
};

// Judges the solution as recorded: capacity and precedence from the activity
// sequences, windows from each activity's operation time (departure minus
// service duration). Empty result iff all hard constraints hold and every
// window is met.
std::vector<Violation> check_feasibility(const Solution& solution, const std::vector<Job>& jobs);

std::string solution_to_json(const std::string& plan_id, const std::string& carrier_id,
                             const Solution& s);
Solution solution_from_json(const std::string& text, std::string* plan_id = nullptr,
                            std::string* carrier_id = nullptr);
void save_solution(const std::string& plan_id, const std::string& carrier_id, const Solution& s,
                   const std::string& path);
Solution load_solution(const std::string& path, std::string* plan_id = nullptr,
                       std::string* carrier_id = nullptr);

}  // namespace subterra::vrp
