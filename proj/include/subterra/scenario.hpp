#pragma once

#include <map>
#include <string>
#include <vector>

#include "subterra/demand.hpp"
#include "subterra/network.hpp"
#include "subterra/vrp.hpp"

namespace subterra::scenario {

enum class ScenarioKind { BC, SHU, WHU, WHU_B };

const char* scenario_name(ScenarioKind k);  // "bc", "shu", "whu", "whu-b"
ScenarioKind parse_scenario(const std::string& s);

// Parcel-job id -> hub id. Jobs absent from the map depart from their
// carrier's depot.
struct HubAllocation {
  std::map<std::string, std::string> job_to_hub;

  bool empty() const { return job_to_hub.empty(); }
};

struct PlanService {
  std::string job_id;
  std::string node;
  int size = 1;
  std::string carrier_id;    // owning carrier (provenance for the shuttle stage)
  bool bike_eligible = false;
};

struct CarrierPlan {
  std::string id;
  std::string carrier_id;  // "whitelabel" for pooled hub plans
  ScenarioKind scenario = ScenarioKind::BC;
  bool is_supply = false;
  std::string hub_id;  // non-empty for hub-based parcel plans
  std::vector<vrp::FleetEntry> fleet;
  std::vector<PlanService> services;

  int total_size() const;
};

struct ScenarioParams {
  double bike_radius_m = 3000;     // hub vicinity for cargo bikes
  int shu_allotment_parcels = 800; // per (carrier, hub) storage in SHU
  int fleet_slack = 2;             // extra vehicles beyond ceil(demand/capacity)
  Seconds vehicle_earliest_start_s = 28800;  // ground vehicles leave from 08:00
  Seconds vehicle_stagger_s = 600;           // per-vehicle start offset
  Seconds vehicle_start_window_s = 14400;    // offsets wrap: dispatch in waves
};

// Separated hub usage: per hub-connected carrier and hub, the closest-first
// customers up to the 800-parcel allotment; jobs whose nearest hub is full
// stay depot-based; ties break on (distance, job id), equidistant hubs on the
// lower hub id.
HubAllocation allocate_shu(const demand::DemandSet& ds, const net::Network& network,
                           const ScenarioParams& params);

// White-label usage: connected carriers' jobs pooled and assigned
// closest-first to each job's nearest hub until its daily capacity (4,000) is
// reached; overflow stays depot-based. Independent of carrier identity.
HubAllocation allocate_whu(const demand::DemandSet& ds, const net::Network& network,
                           const ScenarioParams& params);

// Expand a scenario into independent VRP problems: parcel plans (CEP fleet,
// plus cargo bikes at hubs in WHU-B) and supply plans (Supply-Trucks). In the
// shuttle scenarios, hub supply jobs disappear (the shuttle feeds the hubs)
// and tunnel-connected facility supply moves underground as well.
std::vector<CarrierPlan> build_carrier_plans(ScenarioKind kind, const demand::DemandSet& ds,
                                             const HubAllocation& allocation,
                                             const net::Network& network,
                                             const ScenarioParams& params);

bool tunnel_connected(const net::Network& network, const std::string& node_id);

std::string plans_to_json(const std::vector<CarrierPlan>& plans);
std::vector<CarrierPlan> plans_from_json(const std::string& text);
void save_plans(const std::vector<CarrierPlan>& plans, const std::string& path);
std::vector<CarrierPlan> load_plans(const std::string& path);

}  // namespace subterra::scenario
