#include <doctest.h>

#include <cmath>
#include <map>

#include "subterra/demand.hpp"

using namespace subterra;
using namespace subterra::demand;

namespace {

DemandConfig small_config() {
  DemandConfig cfg;
  cfg.total_parcels = 500;
  cfg.zones = {{"z1", "n1", 1.0}};
  cfg.carriers = {{"c1", "d1", 1.0, true}};
  return cfg;
}

DemandConfig toyish_config(int total) {
  DemandConfig cfg;
  cfg.total_parcels = total;
  cfg.zones = {{"z1", "n1", 1.0}, {"z2", "n2", 1.0}};
  for (int i = 0; i < 7; ++i) {
    Carrier c;
    c.id = "c" + std::to_string(i);
    c.depot_node_id = "d" + std::to_string(i);
    c.market_share = 1.0 / 7.0;
    c.hub_connected = i < 5;
    cfg.carriers.push_back(c);
  }
  // shares must sum to exactly 1
  cfg.carriers.back().market_share = 1.0 - 6.0 / 7.0;
  return cfg;
}

}  // namespace

TEST_CASE("generate_demand: single zone, single carrier") {
  auto ds = generate_demand(small_config(), 7);
  CHECK(ds.parcel_jobs.size() == 500);  // default size 1
  CHECK(ds.total_parcels() == 500);
  for (const auto& j : ds.parcel_jobs) {
    CHECK(j.carrier_id == "c1");
    CHECK(j.customer_node_id == "n1");
    CHECK(j.size == 1);
  }
}

TEST_CASE("generate_demand: multinomial zone counts within 3 sigma") {
  auto cfg = toyish_config(10000);
  auto ds = generate_demand(cfg, 42);
  std::map<std::string, int> per_zone;
  for (const auto& j : ds.parcel_jobs) per_zone[j.customer_node_id] += j.size;
  // n=10000, p=0.5 -> sigma = 50
  CHECK(std::abs(per_zone["n1"] - 5000) <= 150);
  CHECK(std::abs(per_zone["n2"] - 5000) <= 150);
  CHECK(per_zone["n1"] + per_zone["n2"] == 10000);
}

TEST_CASE("generate_demand: carrier shares converge at 3 sigma") {
  auto cfg = toyish_config(14000);
  auto ds = generate_demand(cfg, 99);
  std::map<std::string, int> per_carrier;
  for (const auto& j : ds.parcel_jobs) per_carrier[j.carrier_id] += j.size;
  double p = 1.0 / 7.0;
  double sigma = std::sqrt(14000 * p * (1 - p));
  for (const auto& c : ds.carriers)
    CHECK(std::abs(per_carrier[c.id] - 2000.0) <= 3 * sigma);
}

TEST_CASE("generate_demand: deterministic in (config, seed)") {
  auto cfg = toyish_config(3000);
  cfg.parcel_size_min = 3;
  cfg.parcel_size_max = 9;
  auto a = generate_demand(cfg, 1234);
  auto b = generate_demand(cfg, 1234);
  CHECK(to_json(a) == to_json(b));
  auto c = generate_demand(cfg, 1235);
  CHECK(to_json(a) != to_json(c));
}

TEST_CASE("generate_demand: parcels conserved exactly with sized jobs") {
  auto cfg = toyish_config(9999);
  cfg.parcel_size_min = 4;
  cfg.parcel_size_max = 11;
  auto ds = generate_demand(cfg, 5);
  CHECK(ds.total_parcels() == 9999);
  for (const auto& j : ds.parcel_jobs) CHECK(j.size >= 1);
}

TEST_CASE("generate_demand: validation errors") {
  auto cfg = small_config();
  cfg.zones[0].weight = 0;
  CHECK_THROWS(generate_demand(cfg, 1));
  cfg = small_config();
  cfg.carriers.clear();
  CHECK_THROWS(generate_demand(cfg, 1));
  cfg = small_config();
  cfg.carriers[0].market_share = 0.9;
  CHECK_THROWS(generate_demand(cfg, 1));
}

TEST_CASE("build_supply_jobs: hubs x connected carriers") {
  DemandSet ds;
  for (int h = 0; h < 5; ++h) ds.hubs.push_back({"h" + std::to_string(h), "nh", 4000});
  for (int c = 0; c < 5; ++c) ds.carriers.push_back({"c" + std::to_string(c), "nd", 0.2, true});
  auto jobs = build_supply_jobs(ds);
  CHECK(jobs.size() == 25);
  std::map<std::string, int> per_hub;
  for (const auto& j : jobs) {
    CHECK(j.size == 800);
    per_hub[j.destination] += j.size;
  }
  for (const auto& [hub, parcels] : per_hub) CHECK(parcels == 4000);  // 5 x 800
}

TEST_CASE("build_supply_jobs: no connected carriers, facility supply") {
  DemandSet ds;
  ds.hubs.push_back({"h0", "nh", 4000});
  ds.carriers.push_back({"c0", "nd", 1.0, false});
  CHECK(build_supply_jobs(ds).empty());

  ds.facilities.push_back({"f0", "nf", FacilityKind::industry, 3});
  ds.supply_origin_node = "term";
  auto jobs = build_supply_jobs(ds);
  CHECK(jobs.size() == 3);
  for (const auto& j : jobs) {
    CHECK(j.destination == "f0");
    CHECK(j.size == 800);
    CHECK(j.origin_depot_node == "term");
  }
}

TEST_CASE("demand JSON round-trip") {
  auto cfg = toyish_config(1000);
  cfg.hubs = {{"h1", "n1", 4000}};
  cfg.facilities = {{"f1", "n2", FacilityKind::retail_center, 2}};
  cfg.supply_origin_node = "n2";
  cfg.portal_nodes = {"n1", "n2"};
  auto ds = generate_demand(cfg, 77);
  auto text = to_json(ds);
  auto back = demand_from_json(text);
  CHECK(to_json(back) == text);
  CHECK(back.total_parcels() == 1000);
  CHECK(back.supply_jobs.size() == ds.supply_jobs.size());
}
