#include "subterra/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace subterra::scenario {

using ordered_json = nlohmann::ordered_json;

const char* scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::BC: return "bc";
    case ScenarioKind::SHU: return "shu";
    case ScenarioKind::WHU: return "whu";
    case ScenarioKind::WHU_B: return "whu-b";
  }
  return "?";
}

ScenarioKind parse_scenario(const std::string& s) {
  if (s == "bc") return ScenarioKind::BC;
  if (s == "shu") return ScenarioKind::SHU;
  if (s == "whu") return ScenarioKind::WHU;
  if (s == "whu-b" || s == "whu_b") return ScenarioKind::WHU_B;
  throw std::runtime_error("unknown scenario '" + s + "'");
}

int CarrierPlan::total_size() const {
  int total = 0;
  for (const auto& s : services) total += s.size;
  return total;
}

bool tunnel_connected(const net::Network& network, const std::string& node_id) {
  return network.touches_mode(node_id, net::Mode::tunnel);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Free-flow road seconds/meters from every hub to every node.
struct HubReach {
  std::vector<std::string> hub_ids;
  std::vector<std::unordered_map<std::string, std::pair<Seconds, Meters>>> reach;

  // (seconds, hub index) of the nearest hub; ties prefer the lower hub id,
  // which is the lower index since hubs are sorted.
  std::pair<double, int> nearest(const std::string& node) const {
    double best = kInf;
    int best_hub = -1;
    for (std::size_t h = 0; h < hub_ids.size(); ++h) {
      auto it = reach[h].find(node);
      if (it == reach[h].end()) continue;
      if (it->second.first < best) {
        best = it->second.first;
        best_hub = static_cast<int>(h);
      }
    }
    return {best, best_hub};
  }
};

HubReach hub_reach(const demand::DemandSet& ds, const net::Network& network) {
  HubReach hr;
  for (const auto& hub : ds.hubs) {
    hr.hub_ids.push_back(hub.id);
    hr.reach.push_back(network.freeflow_reach(hub.node_id, net::Mode::road));
  }
  return hr;
}

struct RankedJob {
  double distance = 0;
  std::string customer;
  int size = 0;
  std::string id;
  int hub = -1;

  bool operator<(const RankedJob& o) const {
    if (distance != o.distance) return distance < o.distance;
    if (customer != o.customer) return customer < o.customer;
    if (size != o.size) return size < o.size;
    return id < o.id;
  }
};

}  // namespace

HubAllocation allocate_shu(const demand::DemandSet& ds, const net::Network& network,
                           const ScenarioParams& params) {
  if (ds.hubs.empty()) throw std::invalid_argument("allocate_shu: no hubs");
  HubReach hr = hub_reach(ds, network);

  HubAllocation alloc;
  for (const auto& carrier : ds.carriers) {
    if (!carrier.hub_connected) continue;
    std::vector<RankedJob> ranked;
    for (const auto& job : ds.parcel_jobs) {
      if (job.carrier_id != carrier.id) continue;
      auto [dist, hub] = hr.nearest(job.customer_node_id);
      if (hub < 0) continue;
      ranked.push_back({dist, job.customer_node_id, job.size, job.id, hub});
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> remaining(ds.hubs.size(), params.shu_allotment_parcels);
    for (const auto& rj : ranked) {
      if (remaining[rj.hub] >= rj.size) {
        remaining[rj.hub] -= rj.size;
        alloc.job_to_hub[rj.id] = hr.hub_ids[rj.hub];
      }
    }
  }
  return alloc;
}

HubAllocation allocate_whu(const demand::DemandSet& ds, const net::Network& network,
                           const ScenarioParams& params) {
  (void)params;
  if (ds.hubs.empty()) throw std::invalid_argument("allocate_whu: no hubs");
  HubReach hr = hub_reach(ds, network);

  std::set<std::string> connected;
  for (const auto& c : ds.carriers)
    if (c.hub_connected) connected.insert(c.id);

  std::vector<RankedJob> ranked;
  for (const auto& job : ds.parcel_jobs) {
    if (!connected.count(job.carrier_id)) continue;
    auto [dist, hub] = hr.nearest(job.customer_node_id);
    if (hub < 0) continue;
    ranked.push_back({dist, job.customer_node_id, job.size, job.id, hub});
  }
  std::sort(ranked.begin(), ranked.end());

  std::vector<int> remaining;
  for (const auto& hub : ds.hubs) remaining.push_back(hub.daily_capacity);

  HubAllocation alloc;
  for (const auto& rj : ranked) {
    if (remaining[rj.hub] >= rj.size) {
      remaining[rj.hub] -= rj.size;
      alloc.job_to_hub[rj.id] = hr.hub_ids[rj.hub];
    }
  }
  return alloc;
}

namespace {

vrp::FleetEntry make_entry(const vrp::VehicleType& type, const std::string& start, int demand,
                           const ScenarioParams& params) {
  vrp::FleetEntry e;
  e.type = type;
  e.start_location = start;
  e.count = (demand + type.capacity - 1) / type.capacity + params.fleet_slack;
  e.earliest_start_s = params.vehicle_earliest_start_s;
  e.start_stagger_s = params.vehicle_stagger_s;
  e.start_cycle_s = params.vehicle_start_window_s;
  return e;
}

void check_reachable(const net::Network& network, const CarrierPlan& plan) {
  if (plan.services.empty()) return;
  net::Mode mode = plan.fleet.empty() ? net::Mode::road : plan.fleet[0].type.mode;
  auto reach = network.freeflow_reach(plan.fleet[0].start_location, mode);
  for (const auto& s : plan.services)
    if (!reach.count(s.node))
      throw std::runtime_error("plan '" + plan.id + "': job '" + s.job_id +
                               "' unreachable from '" + plan.fleet[0].start_location + "'");
}

}  // namespace

std::vector<CarrierPlan> build_carrier_plans(ScenarioKind kind, const demand::DemandSet& ds,
                                             const HubAllocation& allocation,
                                             const net::Network& network,
                                             const ScenarioParams& params) {
  if (kind == ScenarioKind::BC && !allocation.empty())
    throw std::invalid_argument("BC expects an empty hub allocation");

  std::map<std::string, const demand::ParcelJob*> jobs_by_id;
  for (const auto& j : ds.parcel_jobs) jobs_by_id[j.id] = &j;
  for (const auto& [job_id, hub_id] : allocation.job_to_hub) {
    if (!jobs_by_id.count(job_id))
      throw std::runtime_error("allocation references unknown job '" + job_id + "'");
    if (!ds.find_hub(hub_id))
      throw std::runtime_error("allocation references unknown hub '" + hub_id + "'");
  }

  std::vector<CarrierPlan> plans;

  // --- Parcel plans ------------------------------------------------------
  // Depot-based: everything not allocated to a hub.
  for (const auto& carrier : ds.carriers) {
    CarrierPlan plan;
    plan.id = carrier.id + "_parcels";
    plan.carrier_id = carrier.id;
    plan.scenario = kind;
    for (const auto& job : ds.parcel_jobs) {
      if (job.carrier_id != carrier.id) continue;
      if (allocation.job_to_hub.count(job.id)) continue;
      plan.services.push_back({job.id, job.customer_node_id, job.size, job.carrier_id, false});
    }
    if (plan.services.empty()) continue;
    plan.fleet = {make_entry(vrp::cep_vehicle(), carrier.depot_node_id, plan.total_size(), params)};
    check_reachable(network, plan);
    plans.push_back(std::move(plan));
  }

  // Hub-based.
  if (kind == ScenarioKind::SHU) {
    for (const auto& carrier : ds.carriers) {
      if (!carrier.hub_connected) continue;
      for (const auto& hub : ds.hubs) {
        CarrierPlan plan;
        plan.id = carrier.id + "_hub_" + hub.id;
        plan.carrier_id = carrier.id;
        plan.scenario = kind;
        plan.hub_id = hub.id;
        for (const auto& job : ds.parcel_jobs) {
          if (job.carrier_id != carrier.id) continue;
          auto it = allocation.job_to_hub.find(job.id);
          if (it == allocation.job_to_hub.end() || it->second != hub.id) continue;
          plan.services.push_back({job.id, job.customer_node_id, job.size, job.carrier_id, false});
        }
        if (plan.services.empty()) continue;
        plan.fleet = {make_entry(vrp::cep_vehicle(), hub.node_id, plan.total_size(), params)};
        check_reachable(network, plan);
        plans.push_back(std::move(plan));
      }
    }
  } else if (kind == ScenarioKind::WHU || kind == ScenarioKind::WHU_B) {
    for (const auto& hub : ds.hubs) {
      CarrierPlan plan;
      plan.id = "whitelabel_" + hub.id;
      plan.carrier_id = "whitelabel";
      plan.scenario = kind;
      plan.hub_id = hub.id;

      auto road_reach = network.freeflow_reach(hub.node_id, net::Mode::road);
      auto bike_reach = network.freeflow_reach(hub.node_id, net::Mode::bike);
      int bike_demand = 0;
      for (const auto& job : ds.parcel_jobs) {
        auto it = allocation.job_to_hub.find(job.id);
        if (it == allocation.job_to_hub.end() || it->second != hub.id) continue;
        bool bike_ok = false;
        if (kind == ScenarioKind::WHU_B) {
          auto rr = road_reach.find(job.customer_node_id);
          bike_ok = rr != road_reach.end() && rr->second.second <= params.bike_radius_m &&
                    bike_reach.count(job.customer_node_id) > 0;
        }
        if (bike_ok) bike_demand += job.size;
        plan.services.push_back({job.id, job.customer_node_id, job.size, job.carrier_id, bike_ok});
      }
      if (plan.services.empty()) continue;
      plan.fleet = {make_entry(vrp::cep_vehicle(), hub.node_id, plan.total_size(), params)};
      if (kind == ScenarioKind::WHU_B && bike_demand > 0)
        plan.fleet.push_back(make_entry(vrp::cep_cargo_bike(), hub.node_id, bike_demand, params));
      check_reachable(network, plan);
      plans.push_back(std::move(plan));
    }
  }

  // --- Supply plans -------------------------------------------------------
  // In shuttle scenarios, hub supply rides the shuttle (derived later from
  // actual departures) and tunnel-connected facility supply goes underground.
  std::map<std::string, std::vector<const demand::SupplyJob*>> by_origin;
  for (const auto& job : ds.supply_jobs) {
    bool keep = true;
    if (kind != ScenarioKind::BC) {
      if (ds.find_hub(job.destination)) keep = false;
      const demand::Facility* f = ds.find_facility(job.destination);
      if (f && tunnel_connected(network, f->node_id)) keep = false;
    }
    if (keep) by_origin[job.origin_depot_node].push_back(&job);
  }

  for (const auto& [origin, jobs] : by_origin) {
    CarrierPlan plan;
    std::string owner = "freight_supplier";
    for (const auto& c : ds.carriers)
      if (c.depot_node_id == origin) {
        owner = c.id;
        break;
      }
    plan.id = owner + "_supply";
    plan.carrier_id = owner;
    plan.scenario = kind;
    plan.is_supply = true;
    for (const auto* job : jobs) {
      std::string node;
      if (const auto* hub = ds.find_hub(job->destination)) node = hub->node_id;
      else if (const auto* f = ds.find_facility(job->destination)) node = f->node_id;
      else throw std::runtime_error("supply job '" + job->id + "': unknown destination '" +
                                    job->destination + "'");
      plan.services.push_back({job->id, node, job->size, owner, false});
    }
    plan.fleet = {make_entry(vrp::supply_truck(), origin, plan.total_size(), params)};
    check_reachable(network, plan);
    plans.push_back(std::move(plan));
  }

  std::sort(plans.begin(), plans.end(),
            [](const CarrierPlan& a, const CarrierPlan& b) { return a.id < b.id; });
  return plans;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string plans_to_json(const std::vector<CarrierPlan>& plans) {
  ordered_json doc = ordered_json::array();
  for (const auto& p : plans) {
    ordered_json jp;
    jp["id"] = p.id;
    jp["carrier_id"] = p.carrier_id;
    jp["scenario"] = scenario_name(p.scenario);
    jp["is_supply"] = p.is_supply;
    jp["hub_id"] = p.hub_id;
    jp["fleet"] = ordered_json::array();
    for (const auto& e : p.fleet)
      jp["fleet"].push_back({{"vehicle_type", e.type.name},
                             {"start_node", e.start_location},
                             {"count", e.count},
                             {"earliest_start_s", e.earliest_start_s},
                             {"stagger_s", e.start_stagger_s},
                             {"start_cycle_s", e.start_cycle_s}});
    jp["services"] = ordered_json::array();
    for (const auto& s : p.services)
      jp["services"].push_back({{"job_id", s.job_id},
                                {"node", s.node},
                                {"size", s.size},
                                {"carrier_id", s.carrier_id},
                                {"bike_eligible", s.bike_eligible}});
    doc.push_back(std::move(jp));
  }
  return doc.dump(2) + "\n";
}

std::vector<CarrierPlan> plans_from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text);
  std::vector<CarrierPlan> plans;
  for (const auto& jp : doc) {
    CarrierPlan p;
    p.id = jp.at("id");
    p.carrier_id = jp.at("carrier_id");
    p.scenario = parse_scenario(jp.at("scenario"));
    p.is_supply = jp.at("is_supply");
    p.hub_id = jp.at("hub_id");
    for (const auto& je : jp.at("fleet")) {
      vrp::FleetEntry e;
      e.type = vrp::vehicle_type_by_name(je.at("vehicle_type"));
      e.start_location = je.at("start_node");
      e.count = je.at("count");
      e.earliest_start_s = je.at("earliest_start_s");
      e.start_stagger_s = je.at("stagger_s");
      e.start_cycle_s = je.at("start_cycle_s");
      p.fleet.push_back(std::move(e));
    }
    for (const auto& js : jp.at("services"))
      p.services.push_back({js.at("job_id"), js.at("node"), js.at("size"), js.at("carrier_id"),
                            js.at("bike_eligible")});
    plans.push_back(std::move(p));
  }
  return plans;
}

void save_plans(const std::vector<CarrierPlan>& plans, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << plans_to_json(plans);
}

std::vector<CarrierPlan> load_plans(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return plans_from_json(ss.str());
}

}  // namespace subterra::scenario
