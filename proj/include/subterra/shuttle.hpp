#pragma once

#include <map>
#include <string>
#include <vector>

#include "subterra/demand.hpp"
#include "subterra/network.hpp"
#include "subterra/scenario.hpp"
#include "subterra/sim.hpp"
#include "subterra/vrp.hpp"

namespace subterra::shuttle {

struct ShuttleShipment {
  std::string id;
  std::string pickup_node;    // external hub portal
  std::string delivery_node;  // micro-hub or connected facility
  int size = 0;
  Seconds window_start_s = 0;
  Seconds window_end_s = 0;
};

struct DeriveContext {
  // Stage-one provenance: tour id -> (originating carrier -> parcels).
  std::map<std::string, std::map<std::string, int>> tour_carrier_parcels;
  const demand::DemandSet* demand = nullptr;
  const net::Network* network = nullptr;
  int shuttle_capacity = 140;
  Seconds window_lead_s = 3600;   // cargo arrives at the earliest 1 h before departure
  Seconds window_close_s = 900;   // and at the latest 15 min before departure
  Seconds supply_window_start_s = 0;      // facility supply: all-day window
  Seconds supply_window_end_s = 86400;
};

// Hub departures become shipments split into capacity-sized pieces with
// window [d - 3600 s, d - 900 s], picked up at the portal nearest the
// originating carrier's depot. Supply jobs to tunnel-connected facilities
// become all-day shipment streams; hub supply jobs are superseded by the
// departure-driven shipments and skipped.
std::vector<ShuttleShipment> derive_shipments(const std::vector<sim::DepartureRecord>& departures,
                                              const std::vector<demand::SupplyJob>& supply_jobs,
                                              scenario::ScenarioKind kind,
                                              const DeriveContext& ctx);

// Even split across shuttle carriers: sort by (window start, id), round-robin.
std::vector<std::vector<ShuttleShipment>> partition_carriers(
    std::vector<ShuttleShipment> shipments, int k);

struct WindowViolation {
  std::string shipment_id;
  Seconds seconds_late_or_early = 0;  // positive = late, negative = early
  Money penalty = 0;
};

struct ShuttleRun {
  std::vector<sim::SolvedPlan> plans;  // one solved plan per shuttle carrier
  sim::ExecutionResult execution;
  std::vector<WindowViolation> violations;
  Money window_penalty = 0;
};

// Solve each partition as a pickup-and-delivery problem with soft windows and
// execute on the tunnel network. Partition i gets seed derived from
// (params.seed, "shuttle", i), so concurrent solving cannot change results.
ShuttleRun plan_and_execute(const std::vector<std::vector<ShuttleShipment>>& partitions,
                            const net::Network& tunnel_network, const vrp::SolverParams& params);

// shuttle_shipments.csv: id,pickup_node,delivery_node,size,window_start_s,window_end_s
void write_shipments_csv(const std::vector<ShuttleShipment>& shipments, const std::string& path);
std::vector<ShuttleShipment> read_shipments_csv(const std::string& path);

// shuttle_violations.csv: shipment_id,seconds_late_or_early,penalty
void write_violations_csv(const std::vector<WindowViolation>& violations, const std::string& path);
std::vector<WindowViolation> read_violations_csv(const std::string& path);

}  // namespace subterra::shuttle
