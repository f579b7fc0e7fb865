#include <doctest.h>

#include <set>

#include "subterra/shuttle.hpp"

using namespace subterra;
using namespace subterra::shuttle;

namespace {

// depot -- portal by road; portal -- hub -- facility by tunnel.
net::Network shuttle_net() {
  std::string nodes = "id,x,y\nd,0,0\nP,1000,0\nH,13000,0\nF,15000,0\n";
  std::string links =
      "id,from,to,length_m,freeflow_mps,mode\n"
      "r_d__P,d,P,1000,10,road\nr_P__d,P,d,1000,10,road\n"
      "t_P__H,P,H,12000,10,tunnel\nt_H__P,H,P,12000,10,tunnel\n"
      "t_H__F,H,F,2000,10,tunnel\nt_F__H,F,H,2000,10,tunnel\n";
  return net::Network::from_csv_text(nodes, links, "");
}

struct Fixture {
  net::Network network = shuttle_net();
  demand::DemandSet ds;
  DeriveContext ctx;

  Fixture() {
    ds.carriers.push_back({"acme", "d", 1.0, true});
    ds.hubs.push_back({"h1", "H", 4000});
    ds.facilities.push_back({"f1", "F", demand::FacilityKind::industry, 1});
    ds.portal_nodes = {"P"};
    ds.supply_origin_node = "d";
    ctx.demand = &ds;
    ctx.network = &network;
    ctx.tour_carrier_parcels["t0"] = {{"acme", 200}};
    ctx.tour_carrier_parcels["t1"] = {{"acme", 140}};
  }
};

}  // namespace

TEST_CASE("derive_shipments: departure split into capacity pieces with the paper window") {
  Fixture f;
  std::vector<sim::DepartureRecord> deps{{"h1", "t0", 8 * 3600, 200}};
  auto shipments = derive_shipments(deps, {}, scenario::ScenarioKind::SHU, f.ctx);
  REQUIRE(shipments.size() == 2);
  CHECK(shipments[0].size == 140);
  CHECK(shipments[1].size == 60);
  for (const auto& s : shipments) {
    CHECK(s.pickup_node == "P");
    CHECK(s.delivery_node == "H");
    CHECK(s.window_start_s == doctest::Approx(25200));  // 07:00
    CHECK(s.window_end_s == doctest::Approx(27900));    // 07:45
    CHECK(s.window_end_s - s.window_start_s == doctest::Approx(2700));
  }
}

TEST_CASE("derive_shipments: exact fit, zero-parcel skip, basecase error") {
  Fixture f;
  std::vector<sim::DepartureRecord> deps{{"h1", "t1", 8 * 3600, 140}};
  auto shipments = derive_shipments(deps, {}, scenario::ScenarioKind::WHU, f.ctx);
  REQUIRE(shipments.size() == 1);
  CHECK(shipments[0].size == 140);

  std::vector<sim::DepartureRecord> zero{{"h1", "t0", 8 * 3600, 0}};
  CHECK(derive_shipments(zero, {}, scenario::ScenarioKind::WHU, f.ctx).empty());

  CHECK_THROWS_AS(derive_shipments(deps, {}, scenario::ScenarioKind::BC, f.ctx),
                  std::invalid_argument);
}

TEST_CASE("derive_shipments: supply streams for tunnel-connected facilities only") {
  Fixture f;
  std::vector<demand::SupplyJob> supply{
      {"sup_f1_0", "f1", 800, "d"},   // connected facility -> shuttle
      {"sup_h1_acme", "h1", 800, "d"}  // hub supply superseded by departures
  };
  auto shipments = derive_shipments({}, supply, scenario::ScenarioKind::SHU, f.ctx);
  REQUIRE(shipments.size() == 6);  // 5 x 140 + 100
  int total = 0;
  for (const auto& s : shipments) {
    CHECK(s.size <= 140);
    CHECK(s.delivery_node == "F");
    CHECK(s.window_start_s == 0);
    CHECK(s.window_end_s == doctest::Approx(86400));
    total += s.size;
  }
  CHECK(total == 800);
}

TEST_CASE("partition_carriers: even round-robin split") {
  std::vector<ShuttleShipment> shipments;
  for (int i = 0; i < 10; ++i)
    shipments.push_back({"s" + std::to_string(i), "P", "H", 10, 1000.0 * i, 1000.0 * i + 2700});
  auto parts = partition_carriers(shipments, 3);
  REQUIRE(parts.size() == 3);
  std::multiset<std::size_t> sizes{parts[0].size(), parts[1].size(), parts[2].size()};
  CHECK(sizes == std::multiset<std::size_t>{3, 3, 4});

  std::set<std::string> seen;
  for (const auto& p : parts)
    for (const auto& s : p) CHECK(seen.insert(s.id).second);
  CHECK(seen.size() == shipments.size());

  auto one = partition_carriers(shipments, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 10);
  for (std::size_t i = 1; i < one[0].size(); ++i)
    CHECK(one[0][i - 1].window_start_s <= one[0][i].window_start_s);

  CHECK_THROWS_AS(partition_carriers(shipments, 0), std::invalid_argument);
}

TEST_CASE("plan_and_execute: feasible window, no violations") {
  Fixture f;
  std::vector<ShuttleShipment> shipments{{"s0", "P", "H", 100, 0, 86400}};
  auto run = plan_and_execute({shipments}, f.network, {});
  REQUIRE(run.plans.size() == 1);
  REQUIRE(run.plans[0].solution.tours.size() == 1);
  CHECK(run.violations.empty());
  CHECK(run.window_penalty == 0.0);
  CHECK(run.plans[0].solution.unassigned.empty());

  // Tunnel-only traffic.
  for (const auto& ex : run.execution.executions)
    for (const auto& link : ex.links)
      CHECK(f.network.link(link.link_id).mode == net::Mode::tunnel);
}

TEST_CASE("plan_and_execute: physically unreachable window is delivered late and sanctioned") {
  Fixture f;
  // Minimal tunnel time P->H is 1200 s; the window closes at 500 s.
  std::vector<ShuttleShipment> shipments{{"s0", "P", "H", 100, 0, 500}};
  vrp::SolverParams params;
  params.window_penalty_per_s = 10;
  auto run = plan_and_execute({shipments}, f.network, params);
  REQUIRE(run.violations.size() == 1);
  CHECK(run.violations[0].shipment_id == "s0");
  CHECK(run.violations[0].seconds_late_or_early == doctest::Approx(700.0));
  CHECK(run.violations[0].penalty == doctest::Approx(7000.0));
  CHECK(run.window_penalty == doctest::Approx(7000.0));
  // The cargo is still delivered: no unassigned jobs.
  CHECK(run.plans[0].solution.unassigned.empty());
}

TEST_CASE("shuttle CSV round-trips") {
  std::vector<ShuttleShipment> shipments{{"s0", "P", "H", 140, 25200, 27900},
                                         {"s1", "P", "F", 60, 0, 86400}};
  write_shipments_csv(shipments, "shuttle_test_shipments.csv");
  auto back = read_shipments_csv("shuttle_test_shipments.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "s0");
  CHECK(back[0].size == 140);
  CHECK(back[1].window_end_s == doctest::Approx(86400));

  std::vector<WindowViolation> violations{{"s0", 700, 7000}};
  write_violations_csv(violations, "shuttle_test_violations.csv");
  auto v = read_violations_csv("shuttle_test_violations.csv");
  REQUIRE(v.size() == 1);
  CHECK(v[0].penalty == doctest::Approx(7000));
}
