#include <doctest.h>

#include <algorithm>
#include <set>

#include "matrix_util.hpp"
#include "subterra/common.hpp"
#include "subterra/rng.hpp"
#include "subterra/vrp.hpp"

using namespace subterra;
using namespace subterra::vrp;
using testutil::euclidean_matrix;
using testutil::Point;

namespace {

MatrixSet depot_line_matrix(int stops, double spacing, double speed,
                            std::vector<Point>* out_pts = nullptr) {
  std::vector<Point> pts{{"depot", 0, 0}};
  for (int i = 1; i <= stops; ++i) pts.push_back({"s" + std::to_string(i), i * spacing, 0});
  if (out_pts) *out_pts = pts;
  return MatrixSet::single(euclidean_matrix(pts, speed), net::Mode::road);
}

Job service(const std::string& id, const std::string& loc, int size) {
  Job j;
  j.id = id;
  j.kind = JobKind::service;
  j.location = loc;
  j.size = size;
  return j;
}

Job shipment(const std::string& id, const std::string& from, const std::string& to, int size) {
  Job j;
  j.id = id;
  j.kind = JobKind::shipment;
  j.pickup_location = from;
  j.location = to;
  j.size = size;
  return j;
}

struct RandomInstance {
  std::vector<Job> jobs;
  std::vector<FleetEntry> fleet;
  MatrixSet mats;
};

RandomInstance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  int n_jobs = rng.uniform_int(3, 7);
  std::vector<Point> pts{{"depot", 2500, 2500}};
  int n_locs = n_jobs + rng.uniform_int(1, 3);
  for (int i = 0; i < n_locs; ++i)
    pts.push_back({"p" + std::to_string(i), static_cast<double>(rng.uniform_int(0, 5000)),
                   static_cast<double>(rng.uniform_int(0, 5000))});

  RandomInstance inst;
  bool with_shipments = seed % 3 == 0;
  for (int i = 0; i < n_jobs; ++i) {
    std::string id = "j" + std::to_string(i);
    int a = rng.uniform_int(1, n_locs);
    int size = rng.uniform_int(1, 100);
    if (with_shipments && i < 2) {
      int b = rng.uniform_int(1, n_locs);
      if (b == a) b = a == n_locs ? 1 : a + 1;
      inst.jobs.push_back(shipment(id, pts[a].id, pts[b].id, size));
    } else {
      inst.jobs.push_back(service(id, pts[a].id, size));
    }
    if (rng.next_double() < 0.3) {
      double open = 28800 + rng.uniform_int(0, 7200);
      inst.jobs.back().window = TimeWindow{open, open + 1800};
    }
  }
  inst.mats = MatrixSet::single(euclidean_matrix(pts, 10.0), net::Mode::road);
  inst.fleet = {{cep_vehicle(), "depot", 1, 28800, 0}, {cep_vehicle(), "depot", 1, 28800, 0}};
  return inst;
}

}  // namespace

TEST_CASE("route_cost: CEP tour over 10 km in one hour") {
  // depot -> stop (5000 m, 1800 s each way at 10/3.6... use speed so times work out)
  std::vector<Point> pts{{"depot", 0, 0}, {"s", 5000, 0}};
  auto mats = MatrixSet::single(euclidean_matrix(pts, 5000.0 / 1800.0), net::Mode::road);

  Solution sol;
  Tour t;
  t.id = "t0";
  t.vehicle_type = cep_vehicle().name;
  t.mode = net::Mode::road;
  t.start_location = "depot";
  t.start_s = 0;
  t.end_s = 3600;
  t.initial_load = 10;
  t.capacity = 230;
  t.activities.push_back({"j", ActivityKind::service, "s", 1800, 1800, 0});
  sol.tours.push_back(t);

  auto rc = route_cost(sol, mats, {service("j", "s", 10)});
  CHECK(rc.total == doctest::Approx(75.18).epsilon(1e-12));
  CHECK(rc.tours.size() == 1);
  CHECK(rc.tours[0].fixed == doctest::Approx(48.8));
  CHECK(rc.tours[0].distance == doctest::Approx(3.7));
  CHECK(rc.tours[0].time == doctest::Approx(22.68));
}

TEST_CASE("route_cost: empty solution is free") {
  Solution sol;
  auto rc = route_cost(sol, depot_line_matrix(1, 1000, 10), {});
  CHECK(rc.total == 0.0);
}

TEST_CASE("route_cost: freight shuttle over 200 km") {
  // pickup at portal == start, delivery 100 km away; round trip 200 km, 7200 s.
  std::vector<Point> pts{{"portal", 0, 0}, {"hub", 100000, 0}};
  auto mats = MatrixSet::single(euclidean_matrix(pts, 100000.0 / 3600.0), net::Mode::tunnel);

  Solution sol;
  Tour t;
  t.id = "t0";
  t.vehicle_type = freight_shuttle().name;
  t.mode = net::Mode::tunnel;
  t.start_location = "portal";
  t.start_s = 0;
  t.end_s = 7200;
  t.capacity = 140;
  t.activities.push_back({"s1", ActivityKind::pickup, "portal", 0, 0, 140});
  t.activities.push_back({"s1", ActivityKind::delivery, "hub", 3600, 3600, 0});
  sol.tours.push_back(t);

  auto rc = route_cost(sol, mats, {shipment("s1", "portal", "hub", 140)});
  CHECK(rc.total == doctest::Approx(114.4).epsilon(1e-12));
}

TEST_CASE("solve: one service at the depot node costs exactly the fixed cost") {
  std::vector<Point> pts{{"depot", 0, 0}};
  auto mats = MatrixSet::single(euclidean_matrix(pts, 10), net::Mode::road);
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 1, 0, 0}};
  auto sol = solve({service("j1", "depot", 5)}, fleet, mats, {});
  REQUIRE(sol.tours.size() == 1);
  CHECK(sol.unassigned.empty());
  CHECK(sol.total_cost == doctest::Approx(48.8));
  CHECK(sol.tours[0].initial_load == 5);
}

TEST_CASE("solve: capacity forces a split (pigeonhole)") {
  auto mats = depot_line_matrix(3, 1000, 10);
  std::vector<Job> jobs;
  for (int i = 0; i < 300; ++i) jobs.push_back(service("j" + std::to_string(i), "s1", 1));
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 4, 0, 0}};
  SolverParams params;
  params.iterations = 5;
  auto sol = solve(jobs, fleet, mats, params);
  CHECK(sol.unassigned.empty());
  CHECK(sol.tours.size() >= 2);
  int total = 0;
  for (const auto& t : sol.tours) {
    CHECK(t.initial_load <= t.capacity);
    total += t.initial_load;
  }
  CHECK(total == 300);
}

TEST_CASE("solve: oversized job is reported unassigned, not dropped") {
  auto mats = depot_line_matrix(2, 1000, 10);
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 2, 0, 0}};
  auto sol = solve({service("big", "s1", 500), service("ok", "s2", 10)}, fleet, mats, {});
  REQUIRE(sol.unassigned.size() == 1);
  CHECK(sol.unassigned[0].job_id == "big");
  CHECK(sol.unassigned[0].reason == "size exceeds every vehicle capacity");
  CHECK(sol.penalty_cost == doctest::Approx(10000.0));
  CHECK(sol.tours.size() == 1);
}

TEST_CASE("brute_force: trivial cases") {
  auto mats = depot_line_matrix(2, 1000, 10);
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 1, 0, 0}};
  auto empty = brute_force({}, fleet, mats, {});
  CHECK(empty.tours.empty());
  CHECK(empty.total_cost == 0.0);

  auto one = brute_force({service("j1", "s1", 3)}, fleet, mats, {});
  auto solved = solve({service("j1", "s1", 3)}, fleet, mats, {});
  REQUIRE(one.tours.size() == 1);
  CHECK(one.total_cost == doctest::Approx(solved.total_cost));
}

TEST_CASE("brute_force: five services on a line are visited in sweep order") {
  std::vector<Point> pts;
  auto mats = depot_line_matrix(5, 1000, 10, &pts);
  std::vector<Job> jobs;
  for (int i = 1; i <= 5; ++i) jobs.push_back(service("j" + std::to_string(i), "s" + std::to_string(i), 1));
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 1, 0, 0}};
  auto sol = brute_force(jobs, fleet, mats, {});
  REQUIRE(sol.tours.size() == 1);
  REQUIRE(sol.tours[0].activities.size() == 5);
  // Hand enumeration: the optimum is the 10 km round trip, 58.8 + 3.7 + 6.3.
  CHECK(sol.total_cost == doctest::Approx(48.8 + 10000 * 0.00037 + 1000 * 0.0063));
  std::vector<std::string> visit;
  for (const auto& a : sol.tours[0].activities) visit.push_back(a.location);
  bool ascending = std::is_sorted(visit.begin(), visit.end());
  bool descending = std::is_sorted(visit.rbegin(), visit.rend());
  CHECK((ascending || descending));
}

TEST_CASE("brute_force: refuses oversized instances") {
  auto mats = depot_line_matrix(2, 1000, 10);
  std::vector<Job> jobs;
  for (int i = 0; i < 9; ++i) jobs.push_back(service("j" + std::to_string(i), "s1", 1));
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 1, 0, 0}};
  CHECK_THROWS(brute_force(jobs, fleet, mats, {}));
}

TEST_CASE("solve vs brute_force on seeded random instances") {
  int within = 0;
  const int kInstances = 25;
  for (int i = 0; i < kInstances; ++i) {
    auto inst = random_instance(1000 + i);
    SolverParams params;
    params.seed = derive_seed(7, "oracle", i);
    params.iterations = 400;
    auto heur = solve(inst.jobs, inst.fleet, inst.mats, params);
    auto exact = brute_force(inst.jobs, inst.fleet, inst.mats, params);
    // Never below the optimum.
    CHECK(heur.total_cost >= exact.total_cost - 1e-6);
    if (heur.total_cost <= 1.02 * exact.total_cost) ++within;
  }
  CHECK(within >= kInstances * 95 / 100);
}

TEST_CASE("check_feasibility: solver output is clean") {
  auto inst = random_instance(4242);
  SolverParams params;
  params.iterations = 200;
  auto sol = solve(inst.jobs, inst.fleet, inst.mats, params);
  for (const auto& v : check_feasibility(sol, inst.jobs)) {
    CHECK(v.kind == ViolationKind::time_window);  // only soft violations allowed
    CHECK_FALSE(v.early);                         // early arrivals wait instead
  }
}

TEST_CASE("check_feasibility: hand-built capacity and window violations") {
  Solution sol;
  Tour t;
  t.id = "t0";
  t.vehicle_type = cep_vehicle().name;
  t.start_location = "depot";
  t.initial_load = 231;
  t.capacity = 230;
  Activity a;
  a.job_id = "late_one";
  a.kind = ActivityKind::delivery;
  a.location = "s1";
  a.arrival_s = 7 * 3600 + 50 * 60;
  a.departure_s = 7 * 3600 + 50 * 60;
  a.load_after = 0;
  t.activities.push_back(a);
  sol.tours.push_back(t);

  Job j = shipment("late_one", "depot", "s1", 1);
  j.window = TimeWindow{7 * 3600.0, 7 * 3600.0 + 45 * 60};
  auto violations = check_feasibility(sol, {j});

  int capacity_hits = 0, window_hits = 0, precedence_hits = 0;
  for (const auto& v : violations) {
    if (v.kind == ViolationKind::capacity) {
      ++capacity_hits;
      CHECK(v.magnitude == doctest::Approx(1.0));
    }
    if (v.kind == ViolationKind::time_window) {
      ++window_hits;
      CHECK(v.magnitude == doctest::Approx(300.0));
      CHECK_FALSE(v.early);
    }
    if (v.kind == ViolationKind::precedence) ++precedence_hits;  // delivery without pickup
  }
  CHECK(capacity_hits == 1);
  CHECK(window_hits == 1);
  CHECK(precedence_hits == 1);
}

TEST_CASE("check_feasibility: early operation reported against recorded times") {
  Solution sol;
  Tour t;
  t.id = "t0";
  t.vehicle_type = cep_vehicle().name;
  t.start_location = "depot";
  t.capacity = 230;
  t.initial_load = 1;
  t.activities.push_back({"j1", ActivityKind::service, "s1", 1000, 1000, 0});
  sol.tours.push_back(t);
  Job j = service("j1", "s1", 1);
  j.window = TimeWindow{2000, 3000};
  auto violations = check_feasibility(sol, {j});
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].early);
  CHECK(violations[0].magnitude == doctest::Approx(1000.0));
}

TEST_CASE("solve: monotone in iterations on a fixed seed") {
  Rng rng(31337);
  std::vector<Point> pts{{"depot", 0, 0}};
  for (int i = 0; i < 25; ++i)
    pts.push_back({"c" + std::to_string(i), static_cast<double>(rng.uniform_int(0, 8000)),
                   static_cast<double>(rng.uniform_int(0, 8000))});
  auto mats = MatrixSet::single(euclidean_matrix(pts, 10), net::Mode::road);
  std::vector<Job> jobs;
  for (int i = 0; i < 25; ++i)
    jobs.push_back(service("j" + std::to_string(i), "c" + std::to_string(i), rng.uniform_int(10, 60)));
  std::vector<FleetEntry> fleet{{cep_vehicle(), "depot", 8, 28800, 600}};

  double prev = 0;
  bool first = true;
  for (int iters : {20, 100, 400}) {
    SolverParams params;
    params.seed = 5;
    params.iterations = iters;
    auto sol = solve(jobs, fleet, mats, params);
    if (!first) CHECK(sol.total_cost <= prev + 1e-9);
    prev = sol.total_cost;
    first = false;
  }
}

TEST_CASE("solve: deterministic and cost-consistent with route_cost") {
  auto inst = random_instance(777);
  SolverParams params;
  params.seed = 99;
  params.iterations = 300;
  auto a = solve(inst.jobs, inst.fleet, inst.mats, params);
  auto b = solve(inst.jobs, inst.fleet, inst.mats, params);
  CHECK(solution_to_json("p", "c", a) == solution_to_json("p", "c", b));

  auto rc = route_cost(a, inst.mats, inst.jobs);
  CHECK(nearly_equal(rc.total, a.total_cost, 1e-9));
  CHECK(nearly_equal(rc.route_cost, a.route_cost, 1e-9));
}

TEST_CASE("solution JSON round-trip") {
  auto inst = random_instance(31);
  SolverParams params;
  params.iterations = 50;
  auto sol = solve(inst.jobs, inst.fleet, inst.mats, params);
  std::string plan, carrier;
  auto text = solution_to_json("plan_x", "carrier_y", sol);
  auto back = solution_from_json(text, &plan, &carrier);
  CHECK(plan == "plan_x");
  CHECK(carrier == "carrier_y");
  CHECK(solution_to_json(plan, carrier, back) == text);
}

TEST_CASE("tour load prefix stays within bounds (solver contract)") {
  for (std::uint64_t seed : {5ull, 6ull, 9ull}) {  // 6 and 9 include shipments (seed%3==0)
    auto inst = random_instance(seed);
    SolverParams params;
    params.iterations = 150;
    auto sol = solve(inst.jobs, inst.fleet, inst.mats, params);
    for (const auto& t : sol.tours) {
      CHECK(t.initial_load >= 0);
      CHECK(t.initial_load <= t.capacity);
      for (const auto& act : t.activities) {
        CHECK(act.load_after >= 0);
        CHECK(act.load_after <= t.capacity);
      }
    }
  }
}
