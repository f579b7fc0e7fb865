#pragma once

#include <array>
#include <string>
#include <vector>

#include "subterra/demand.hpp"
#include "subterra/network.hpp"

namespace subterra::citygen {

struct FacilitySpec {
  std::string id;
  demand::FacilityKind kind = demand::FacilityKind::industry;
  int daily_supply = 1;   // truckloads per day
  double fx = 0.5;        // fractional grid position in [0, 1]
  double fy = 0.5;
  bool tunnel = false;    // gets a direct tunnel connection
};

// Synthetic city: a square road grid with rush-hour speed profiles, an
// inner-city bike grid, a tunnel loop through five micro-hubs with spurs to
// border portals and connected facilities, and a radial parcel-density kernel.
// Fully deterministic (no RNG): the demand generator adds the randomness.
struct CityConfig {
  int grid_nx = 13;
  int grid_ny = 13;
  double spacing_m = 600;
  double road_speed_mps = 13.89;   // 50 km/h
  double bike_speed_mps = 4.17;    // 15 km/h
  double tunnel_speed_mps = 10.0;
  int bike_halfwidth = 4;          // grid steps around the center with bike links
  double demand_sigma_m = 2000;    // radial density kernel
  int hub_daily_capacity = 4000;
  int total_parcels = 20000;
  int parcel_size_min = 8;
  int parcel_size_max = 20;
  int carrier_count = 7;
  int hub_connected_count = 5;
  // Hourly road speed factors (fraction of free flow), rush hours slower.
  std::array<double, 24> hourly_speed_factor{1, 1, 1, 1, 1, 1, 0.9, 0.6, 0.6, 0.6, 0.8, 0.8,
                                             0.8, 0.8, 0.8, 0.8, 0.62, 0.62, 0.62, 0.85, 0.95,
                                             1, 1, 1};
  std::vector<FacilitySpec> facilities = default_facilities();

  static std::vector<FacilitySpec> default_facilities();
};

struct City {
  net::Network network;
  demand::DemandConfig demand_config;
};

City build_city(const CityConfig& cfg);

}  // namespace subterra::citygen
