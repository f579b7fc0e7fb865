#include "subterra/kpi.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "subterra/csv.hpp"

namespace subterra::kpi {

using ordered_json = nlohmann::ordered_json;

const char* class_name(VehicleClass c) {
  switch (c) {
    case VehicleClass::light_commercial: return "light_commercial";
    case VehicleClass::heavy_duty: return "heavy_duty";
    case VehicleClass::shuttle: return "shuttle";
    case VehicleClass::bike: return "bike";
  }
  return "?";
}

VehicleClass class_of_vehicle_type(const std::string& vehicle_type) {
  if (vehicle_type == "CEP-Vehicle") return VehicleClass::light_commercial;
  if (vehicle_type == "Supply-Truck") return VehicleClass::heavy_duty;
  if (vehicle_type == "Freight Shuttle") return VehicleClass::shuttle;
  if (vehicle_type == "CEP-Cargo-Bike") return VehicleClass::bike;
  throw std::runtime_error("no emission class for vehicle type '" + vehicle_type + "'");
}

double EmissionFactors::factor(VehicleClass c) const {
  switch (c) {
    case VehicleClass::light_commercial: return light_commercial;
    case VehicleClass::heavy_duty: return heavy_duty;
    case VehicleClass::shuttle: return shuttle;
    case VehicleClass::bike: return bike;
  }
  return 0;
}

Emissions emissions(const std::vector<sim::TourExecution>& executions,
                    const EmissionFactors& factors) {
  Emissions e;
  for (const auto& ex : executions) {
    double km = ex.total_m / 1000.0;
    VehicleClass c = class_of_vehicle_type(ex.vehicle_type);
    double tonnes = km * factors.factor(c) / 1e6;
    switch (c) {
      case VehicleClass::light_commercial: e.light_commercial_t += tonnes; break;
      case VehicleClass::heavy_duty: e.heavy_duty_t += tonnes; break;
      case VehicleClass::shuttle: e.shuttle_t += tonnes; break;
      case VehicleClass::bike: e.bike_t += tonnes; break;
    }
  }
  e.total_t = e.light_commercial_t + e.heavy_duty_t + e.shuttle_t + e.bike_t;
  return e;
}

LoadFactorResult load_factor(const std::vector<sim::SolvedPlan>& plans) {
  LoadFactorResult r;
  double sum = 0;
  for (const auto& plan : plans)
    for (const auto& tour : plan.solution.tours) {
      if (tour.mode == net::Mode::tunnel) continue;
      sum += static_cast<double>(tour.initial_load) / tour.capacity;
      r.tours += 1;
    }
  if (r.tours > 0) {
    r.defined = true;
    r.value = sum / r.tours;
  }
  return r;
}

std::vector<TourLengthRow> tour_length_table(const std::vector<sim::TourExecution>& executions) {
  std::vector<TourLengthRow> rows;
  for (const auto& ex : executions) {
    TourLengthRow row;
    row.vehicle_type = ex.vehicle_type;
    row.tour_id = ex.tour_id;
    row.km = ex.total_m / 1000.0;
    row.load_factor = ex.capacity > 0 ? static_cast<double>(ex.initial_load) / ex.capacity : 0;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_tour_lengths_csv(const std::vector<TourLengthRow>& rows, const std::string& path) {
  csv::Writer w({"vehicle_type", "tour_id", "km", "load_factor"});
  for (const auto& r : rows)
    w.row({r.vehicle_type, r.tour_id, format_double(r.km), format_double(r.load_factor)});
  w.save(path);
}

KpiReport build_report(const std::string& scenario,
                       const std::vector<sim::TourExecution>& executions,
                       const std::vector<sim::SolvedPlan>& plans, const EmissionFactors& factors) {
  KpiReport r;
  r.scenario = scenario;

  for (const auto& ex : executions) {
    double km = ex.total_m / 1000.0;
    switch (class_of_vehicle_type(ex.vehicle_type)) {
      case VehicleClass::light_commercial:
      case VehicleClass::heavy_duty: r.ground_distance_km += km; break;
      case VehicleClass::shuttle: r.shuttle_distance_km += km; break;
      case VehicleClass::bike: r.bike_distance_km += km; break;
    }
  }
  r.total_distance_km = r.ground_distance_km + r.shuttle_distance_km + r.bike_distance_km;

  Emissions e = emissions(executions, factors);
  r.co2_light_commercial_t = e.light_commercial_t;
  r.co2_heavy_duty_t = e.heavy_duty_t;
  r.co2_total_t = e.total_t;

  auto lf = load_factor(plans);
  r.load_defined = lf.defined;
  r.average_ground_vehicle_load = lf.value;

  for (const auto& plan : plans)
    for (const auto& tour : plan.solution.tours) {
      const auto& vt = vrp::vehicle_type_by_name(tour.vehicle_type);
      std::string cls = class_name(class_of_vehicle_type(tour.vehicle_type));
      r.vehicles_used[cls] += 1;
      r.operating_cost[cls] += vt.fixed_cost + tour.planned_meters * vt.cost_per_meter +
                               (tour.end_s - tour.start_s) * vt.cost_per_second;
    }
  return r;
}

KpiReport aggregate_replications(const std::vector<KpiReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_replications: no reports");
  for (const auto& r : reports)
    if (r.scenario != reports[0].scenario)
      throw std::invalid_argument("aggregate_replications: mixed scenario kinds");

  KpiReport mean;
  mean.scenario = reports[0].scenario;
  double n = static_cast<double>(reports.size());
  int defined = 0;
  for (const auto& r : reports) {
    mean.total_distance_km += r.total_distance_km / n;
    mean.ground_distance_km += r.ground_distance_km / n;
    mean.shuttle_distance_km += r.shuttle_distance_km / n;
    mean.bike_distance_km += r.bike_distance_km / n;
    mean.co2_light_commercial_t += r.co2_light_commercial_t / n;
    mean.co2_heavy_duty_t += r.co2_heavy_duty_t / n;
    mean.co2_total_t += r.co2_total_t / n;
    if (r.load_defined) {
      mean.average_ground_vehicle_load += r.average_ground_vehicle_load;
      ++defined;
    }
    for (const auto& [cls, v] : r.vehicles_used) mean.vehicles_used[cls] += v / n;
    for (const auto& [cls, v] : r.operating_cost) mean.operating_cost[cls] += v / n;
  }
  if (defined > 0) {
    mean.load_defined = true;
    mean.average_ground_vehicle_load /= defined;
  }
  return mean;
}

std::map<std::string, FieldDelta> compare(const KpiReport& base, const KpiReport& variant) {
  std::map<std::string, FieldDelta> out;
  auto add = [&](const std::string& field, double b, double v) {
    FieldDelta d;
    d.base = b;
    d.variant = v;
    d.delta = v - b;
    if (b != 0) {
      d.pct_defined = true;
      d.pct = (v - b) / b * 100.0;
    }
    out[field] = d;
  };
  add("total_distance_km", base.total_distance_km, variant.total_distance_km);
  add("ground_distance_km", base.ground_distance_km, variant.ground_distance_km);
  add("shuttle_distance_km", base.shuttle_distance_km, variant.shuttle_distance_km);
  add("bike_distance_km", base.bike_distance_km, variant.bike_distance_km);
  add("average_ground_vehicle_load", base.average_ground_vehicle_load,
      variant.average_ground_vehicle_load);
  add("co2_light_commercial_t", base.co2_light_commercial_t, variant.co2_light_commercial_t);
  add("co2_heavy_duty_t", base.co2_heavy_duty_t, variant.co2_heavy_duty_t);
  add("co2_total_t", base.co2_total_t, variant.co2_total_t);
  return out;
}

std::string report_to_json(const KpiReport& r) {
  ordered_json doc;
  doc["scenario"] = r.scenario;
  doc["total_distance_km"] = r.total_distance_km;
  doc["ground_distance_km"] = r.ground_distance_km;
  doc["shuttle_distance_km"] = r.shuttle_distance_km;
  doc["bike_distance_km"] = r.bike_distance_km;
  doc["load_defined"] = r.load_defined;
  doc["average_ground_vehicle_load"] = r.average_ground_vehicle_load;
  doc["co2_t"] = {{"light_commercial", r.co2_light_commercial_t},
                  {"heavy_duty", r.co2_heavy_duty_t},
                  {"total", r.co2_total_t}};
  doc["vehicles_used"] = r.vehicles_used;
  doc["operating_cost"] = r.operating_cost;
  return doc.dump(2) + "\n";
}

KpiReport report_from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text);
  KpiReport r;
  r.scenario = doc.at("scenario");
  r.total_distance_km = doc.at("total_distance_km");
  r.ground_distance_km = doc.at("ground_distance_km");
  r.shuttle_distance_km = doc.at("shuttle_distance_km");
  r.bike_distance_km = doc.at("bike_distance_km");
  r.load_defined = doc.at("load_defined");
  r.average_ground_vehicle_load = doc.at("average_ground_vehicle_load");
  r.co2_light_commercial_t = doc.at("co2_t").at("light_commercial");
  r.co2_heavy_duty_t = doc.at("co2_t").at("heavy_duty");
  r.co2_total_t = doc.at("co2_t").at("total");
  r.vehicles_used = doc.at("vehicles_used").get<std::map<std::string, double>>();
  r.operating_cost = doc.at("operating_cost").get<std::map<std::string, double>>();
  return r;
}

void save_report(const KpiReport& r, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << report_to_json(r);
}

KpiReport load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

void write_comparison_csv(const std::vector<KpiReport>& reports, const std::string& path) {
  csv::Writer w({"scenario", "total_km", "ground_km", "shuttle_km", "bike_km", "avg_ground_load",
                 "co2_cep_t", "co2_truck_t", "co2_total_t"});
  for (const auto& r : reports)
    w.row({r.scenario, format_double(r.total_distance_km), format_double(r.ground_distance_km),
           format_double(r.shuttle_distance_km), format_double(r.bike_distance_km),
           format_double(r.average_ground_vehicle_load), format_double(r.co2_light_commercial_t),
           format_double(r.co2_heavy_duty_t), format_double(r.co2_total_t)});
  w.save(path);
}

}  // namespace subterra::kpi
