#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subterra/common.hpp"

namespace subterra::demand {

struct Zone {
  std::string id;
  std::string centroid_node_id;
  double weight = 0;  // non-negative demand density
};

struct Carrier {
  std::string id;
  std::string depot_node_id;
  double market_share = 0;  // in [0, 1], shares sum to 1
  bool hub_connected = false;
};

struct Hub {
  std::string id;
  std::string node_id;  // must touch both road and tunnel subgraphs
  int daily_capacity = 4000;
};

enum class FacilityKind { industry, retail_center };

const char* facility_kind_name(FacilityKind k);
FacilityKind parse_facility_kind(const std::string& s);

struct Facility {
  std::string id;
  std::string node_id;
  FacilityKind kind = FacilityKind::industry;
  int daily_supply = 0;  // truckload-equivalents per day
};

struct ParcelJob {
  std::string id;
  std::string customer_node_id;
  int size = 1;  // parcels
  std::string carrier_id;
};

struct SupplyJob {
  std::string id;
  std::string destination;  // hub id or facility id
  int size = 0;             // parcels, <= truckload (800)
  std::string origin_depot_node;
};

struct DemandConfig {
  int total_parcels = 0;
  int parcel_size_min = 1;
  int parcel_size_max = 1;
  int truckload_parcels = 800;
  std::vector<Zone> zones;
  std::vector<Carrier> carriers;
  std::vector<Hub> hubs;
  std::vector<Facility> facilities;
  std::string supply_origin_node;          // freight terminal feeding facilities
  std::vector<std::string> portal_nodes;   // tunnel portals at the city border
};

struct DemandSet {
  std::vector<Zone> zones;
  std::vector<Carrier> carriers;
  std::vector<Hub> hubs;
  std::vector<Facility> facilities;
  std::vector<ParcelJob> parcel_jobs;
  std::vector<SupplyJob> supply_jobs;
  std::string supply_origin_node;
  std::vector<std::string> portal_nodes;

  int total_parcels() const;
  const Carrier& carrier(const std::string& id) const;
  const Hub* find_hub(const std::string& id) const;
  const Facility* find_facility(const std::string& id) const;
};

// Multinomial draw of parcels over zone weights, carrier assignment by
// market-share multinomial, then per-(zone, carrier) splitting into jobs of
// configured size. Deterministic in (config, seed); total parcels conserved
// exactly.
DemandSet generate_demand(const DemandConfig& config, std::uint64_t seed);

// Per hub: one truckload-sized supply job per hub-connected carrier (5 hubs x
// 5 carriers x 800 = the paper's 4,000 parcels per hub per day). Per facility:
// daily_supply truckload jobs from the freight terminal.
std::vector<SupplyJob> build_supply_jobs(const DemandSet& ds);

std::string to_json(const DemandSet& ds);
DemandSet demand_from_json(const std::string& text);
void save_demand(const DemandSet& ds, const std::string& path);
DemandSet load_demand(const std::string& path);

}  // namespace subterra::demand
