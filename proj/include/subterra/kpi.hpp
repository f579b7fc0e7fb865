#pragma once

#include <map>
#include <string>
#include <vector>

#include "subterra/sim.hpp"

namespace subterra::kpi {

enum class VehicleClass { light_commercial, heavy_duty, shuttle, bike };

const char* class_name(VehicleClass c);
// CEP-Vehicle -> light_commercial, Supply-Truck -> heavy_duty,
// Freight Shuttle -> shuttle, CEP-Cargo-Bike -> bike; anything else throws.
VehicleClass class_of_vehicle_type(const std::string& vehicle_type);

// Grams of CO2 per vehicle kilometer; electric shuttles and bikes emit no
// local CO2.
struct EmissionFactors {
  double light_commercial = 197.295;
  double heavy_duty = 789.505;
  double shuttle = 0;
  double bike = 0;

  double factor(VehicleClass c) const;
};

struct Emissions {
  double light_commercial_t = 0;
  double heavy_duty_t = 0;
  double shuttle_t = 0;
  double bike_t = 0;
  double total_t = 0;
};

// tonnes = km x g/km / 1e6, exact linear accounting over executions.
Emissions emissions(const std::vector<sim::TourExecution>& executions,
                    const EmissionFactors& factors);

struct LoadFactorResult {
  bool defined = false;  // false when there are no ground tours
  double value = 0;
  int tours = 0;
};

// Mean over above-ground tours (shuttles excluded) of initial onboard parcels
// over vehicle capacity.
LoadFactorResult load_factor(const std::vector<sim::SolvedPlan>& plans);

struct TourLengthRow {
  std::string vehicle_type;
  std::string tour_id;
  double km = 0;
  double load_factor = 0;
};

std::vector<TourLengthRow> tour_length_table(const std::vector<sim::TourExecution>& executions);
void write_tour_lengths_csv(const std::vector<TourLengthRow>& rows, const std::string& path);

struct KpiReport {
  std::string scenario;
  double total_distance_km = 0;
  double ground_distance_km = 0;   // CEP vehicles + trucks (bikes listed separately)
  double shuttle_distance_km = 0;
  double bike_distance_km = 0;
  bool load_defined = false;
  double average_ground_vehicle_load = 0;
  double co2_light_commercial_t = 0;
  double co2_heavy_duty_t = 0;
  double co2_total_t = 0;
  std::map<std::string, double> vehicles_used;   // per vehicle class, tour counts
  std::map<std::string, double> operating_cost;  // per vehicle class, solver-reported
};

KpiReport build_report(const std::string& scenario,
                       const std::vector<sim::TourExecution>& executions,
                       const std::vector<sim::SolvedPlan>& plans, const EmissionFactors& factors);

// Field-wise arithmetic mean over replications of one scenario. Vehicle
// counts keep their exact means here; display rounding is the writers' job.
KpiReport aggregate_replications(const std::vector<KpiReport>& reports);

struct FieldDelta {
  double base = 0;
  double variant = 0;
  double delta = 0;
  bool pct_defined = false;  // false when the base is zero
  double pct = 0;
};

std::map<std::string, FieldDelta> compare(const KpiReport& base, const KpiReport& variant);

std::string report_to_json(const KpiReport& r);
KpiReport report_from_json(const std::string& text);
void save_report(const KpiReport& r, const std::string& path);
KpiReport load_report(const std::string& path);

// comparison.csv:
// scenario,total_km,ground_km,shuttle_km,bike_km,avg_ground_load,co2_cep_t,co2_truck_t,co2_total_t
void write_comparison_csv(const std::vector<KpiReport>& reports, const std::string& path);

}  // namespace subterra::kpi
