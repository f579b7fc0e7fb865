#include "subterra/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "subterra/rng.hpp"

namespace subterra::demand {

using ordered_json = nlohmann::ordered_json;

const char* facility_kind_name(FacilityKind k) {
  return k == FacilityKind::industry ? "industry" : "retail_center";
}

FacilityKind parse_facility_kind(const std::string& s) {
  if (s == "industry") return FacilityKind::industry;
  if (s == "retail_center") return FacilityKind::retail_center;
  throw std::runtime_error("unknown facility kind '" + s + "'");
}

int DemandSet::total_parcels() const {
  int total = 0;
  for (const auto& j : parcel_jobs) total += j.size;
  return total;
}

const Carrier& DemandSet::carrier(const std::string& id) const {
  for (const auto& c : carriers)
    if (c.id == id) return c;
  throw std::runtime_error("unknown carrier '" + id + "'");
}

const Hub* DemandSet::find_hub(const std::string& id) const {
  for (const auto& h : hubs)
    if (h.id == id) return &h;
  return nullptr;
}

const Facility* DemandSet::find_facility(const std::string& id) const {
  for (const auto& f : facilities)
    if (f.id == id) return &f;
  return nullptr;
}

namespace {

void validate_config(const DemandConfig& cfg) {
  if (cfg.total_parcels <= 0) throw std::invalid_argument("generate_demand: total_parcels must be > 0");
  if (cfg.carriers.empty()) throw std::invalid_argument("generate_demand: empty carrier list");
  if (cfg.zones.empty()) throw std::invalid_argument("generate_demand: empty zone list");
  if (cfg.parcel_size_min < 1 || cfg.parcel_size_max < cfg.parcel_size_min)
    throw std::invalid_argument("generate_demand: invalid parcel size range");
  double weight_sum = 0;
  for (const auto& z : cfg.zones) {
    if (z.weight < 0) throw std::invalid_argument("zone '" + z.id + "': negative weight");
    weight_sum += z.weight;
  }
  if (!(weight_sum > 0)) throw std::invalid_argument("generate_demand: zone weights sum to zero");
  double share_sum = 0;
  for (const auto& c : cfg.carriers) share_sum += c.market_share;
  if (std::abs(share_sum - 1.0) > 1e-9)
    throw std::invalid_argument("generate_demand: market shares sum to " +
                                format_double(share_sum) + ", expected 1");
}

}  // namespace

DemandSet generate_demand(const DemandConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);

  DemandSet ds;
  ds.zones = cfg.zones;
  ds.carriers = cfg.carriers;
  ds.hubs = cfg.hubs;
  ds.facilities = cfg.facilities;
  ds.supply_origin_node = cfg.supply_origin_node;
  ds.portal_nodes = cfg.portal_nodes;

  std::sort(ds.zones.begin(), ds.zones.end(), [](const Zone& a, const Zone& b) { return a.id < b.id; });
  std::sort(ds.carriers.begin(), ds.carriers.end(),
            [](const Carrier& a, const Carrier& b) { return a.id < b.id; });
  std::sort(ds.hubs.begin(), ds.hubs.end(), [](const Hub& a, const Hub& b) { return a.id < b.id; });
  std::sort(ds.facilities.begin(), ds.facilities.end(),
            [](const Facility& a, const Facility& b) { return a.id < b.id; });

  Rng rng(derive_seed(seed, "demand"));

  std::vector<double> zone_weights;
  zone_weights.reserve(ds.zones.size());
  for (const auto& z : ds.zones) zone_weights.push_back(z.weight);
  auto zone_cum = cumulative(zone_weights);

  std::vector<double> carrier_shares;
  carrier_shares.reserve(ds.carriers.size());
  for (const auto& c : ds.carriers) carrier_shares.push_back(c.market_share);
  auto carrier_cum = cumulative(carrier_shares);

  // Multinomial margins: one categorical draw per parcel for zone and carrier.
  std::vector<std::vector<int>> parcels(ds.zones.size(), std::vector<int>(ds.carriers.size(), 0));
  for (int p = 0; p < cfg.total_parcels; ++p) {
    std::size_t z = rng.categorical(zone_cum);
    std::size_t c = rng.categorical(carrier_cum);
    parcels[z][c] += 1;
  }

  for (std::size_t z = 0; z < ds.zones.size(); ++z) {
    for (std::size_t c = 0; c < ds.carriers.size(); ++c) {
      int remaining = parcels[z][c];
      int k = 0;
      while (remaining > 0) {
        int size = cfg.parcel_size_min == cfg.parcel_size_max
                       ? cfg.parcel_size_min
                       : rng.uniform_int(cfg.parcel_size_min, cfg.parcel_size_max);
        if (size > remaining) size = remaining;
        ParcelJob job;
        job.id = "p_" + ds.zones[z].id + "_" + ds.carriers[c].id + "_" + std::to_string(k++);
        job.customer_node_id = ds.zones[z].centroid_node_id;
        job.size = size;
        job.carrier_id = ds.carriers[c].id;
        ds.parcel_jobs.push_back(std::move(job));
        remaining -= size;
      }
    }
  }

  ds.supply_jobs = build_supply_jobs(ds);
  return ds;
}

std::vector<SupplyJob> build_supply_jobs(const DemandSet& ds) {
  std::vector<SupplyJob> jobs;
  const int truckload = 800;

  for (const auto& hub : ds.hubs) {
    for (const auto& carrier : ds.carriers) {
      if (!carrier.hub_connected) continue;
      SupplyJob j;
      j.id = "sup_" + hub.id + "_" + carrier.id;
      j.destination = hub.id;
      j.size = truckload;
      j.origin_depot_node = carrier.depot_node_id;
      jobs.push_back(std::move(j));
    }
  }

  for (const auto& f : ds.facilities) {
    for (int k = 0; k < f.daily_supply; ++k) {
      SupplyJob j;
      j.id = "sup_" + f.id + "_" + std::to_string(k);
      j.destination = f.id;
      j.size = truckload;
      j.origin_depot_node = ds.supply_origin_node;
      jobs.push_back(std::move(j));
    }
  }
  return jobs;
}

std::string to_json(const DemandSet& ds) {
  ordered_json doc;
  doc["zones"] = ordered_json::array();
  for (const auto& z : ds.zones)
    doc["zones"].push_back({{"id", z.id}, {"centroid_node_id", z.centroid_node_id}, {"weight", z.weight}});
  doc["carriers"] = ordered_json::array();
  for (const auto& c : ds.carriers)
    doc["carriers"].push_back({{"id", c.id},
                               {"depot_node_id", c.depot_node_id},
                               {"market_share", c.market_share},
                               {"hub_connected", c.hub_connected}});
  doc["hubs"] = ordered_json::array();
  for (const auto& h : ds.hubs)
    doc["hubs"].push_back({{"id", h.id}, {"node_id", h.node_id}, {"daily_capacity", h.daily_capacity}});
  doc["facilities"] = ordered_json::array();
  for (const auto& f : ds.facilities)
    doc["facilities"].push_back({{"id", f.id},
                                 {"node_id", f.node_id},
                                 {"kind", facility_kind_name(f.kind)},
                                 {"daily_supply", f.daily_supply}});
  doc["parcel_jobs"] = ordered_json::array();
  for (const auto& j : ds.parcel_jobs)
    doc["parcel_jobs"].push_back({{"id", j.id},
                                  {"customer_node_id", j.customer_node_id},
                                  {"size", j.size},
                                  {"carrier_id", j.carrier_id}});
  doc["supply_jobs"] = ordered_json::array();
  for (const auto& j : ds.supply_jobs)
    doc["supply_jobs"].push_back({{"id", j.id},
                                  {"destination", j.destination},
                                  {"size", j.size},
                                  {"origin_depot_node", j.origin_depot_node}});
  doc["supply_origin_node"] = ds.supply_origin_node;
  doc["portal_nodes"] = ds.portal_nodes;
  return doc.dump(2) + "\n";
}

DemandSet demand_from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text);
  DemandSet ds;
  for (const auto& z : doc.at("zones"))
    ds.zones.push_back({z.at("id"), z.at("centroid_node_id"), z.at("weight")});
  for (const auto& c : doc.at("carriers"))
    ds.carriers.push_back({c.at("id"), c.at("depot_node_id"), c.at("market_share"), c.at("hub_connected")});
  for (const auto& h : doc.at("hubs"))
    ds.hubs.push_back({h.at("id"), h.at("node_id"), h.at("daily_capacity")});
  for (const auto& f : doc.at("facilities"))
    ds.facilities.push_back({f.at("id"), f.at("node_id"),
                             parse_facility_kind(f.at("kind").get<std::string>()),
                             f.at("daily_supply")});
  for (const auto& j : doc.at("parcel_jobs"))
    ds.parcel_jobs.push_back({j.at("id"), j.at("customer_node_id"), j.at("size"), j.at("carrier_id")});
  for (const auto& j : doc.at("supply_jobs"))
    ds.supply_jobs.push_back({j.at("id"), j.at("destination"), j.at("size"), j.at("origin_depot_node")});
  ds.supply_origin_node = doc.at("supply_origin_node");
  ds.portal_nodes = doc.at("portal_nodes").get<std::vector<std::string>>();
  return ds;
}

void save_demand(const DemandSet& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_json(ds);
}

DemandSet load_demand(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return demand_from_json(ss.str());
}

}  // namespace subterra::demand
