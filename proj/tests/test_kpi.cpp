#include <doctest.h>

#include "subterra/common.hpp"
#include "subterra/kpi.hpp"

using namespace subterra;
using namespace subterra::kpi;

namespace {

sim::TourExecution exec_of(const std::string& type, double km, const std::string& id = "t0",
                           int load = 0, int capacity = 1) {
  sim::TourExecution ex;
  ex.tour_id = id;
  ex.vehicle_type = type;
  ex.total_m = km * 1000.0;
  ex.initial_load = load;
  ex.capacity = capacity;
  return ex;
}

sim::SolvedPlan plan_with_tour(const std::string& type, net::Mode mode, int load, int capacity,
                               double meters = 0, double duration_s = 0) {
  sim::SolvedPlan p;
  p.plan_id = "p";
  vrp::Tour t;
  t.id = "t";
  t.vehicle_type = type;
  t.mode = mode;
  t.initial_load = load;
  t.capacity = capacity;
  t.planned_meters = meters;
  t.start_s = 0;
  t.end_s = duration_s;
  p.solution.tours.push_back(t);
  return p;
}

}  // namespace

TEST_CASE("emissions: exact factors per 1000 km") {
  EmissionFactors f;
  auto cep = emissions({exec_of("CEP-Vehicle", 1000)}, f);
  CHECK(nearly_equal(cep.light_commercial_t, 0.197295, 1e-9));
  CHECK(nearly_equal(cep.total_t, 0.197295, 1e-9));

  auto truck = emissions({exec_of("Supply-Truck", 1000)}, f);
  CHECK(nearly_equal(truck.heavy_duty_t, 0.789505, 1e-9));

  auto zero = emissions({exec_of("Freight Shuttle", 1000), exec_of("CEP-Cargo-Bike", 500, "t1")}, f);
  CHECK(zero.total_t == 0.0);

  sim::TourExecution bogus;
  bogus.vehicle_type = "Zeppelin";
  CHECK_THROWS(emissions({bogus}, f));
}

TEST_CASE("emissions: linear in the execution set") {
  EmissionFactors f;
  std::vector<sim::TourExecution> a{exec_of("CEP-Vehicle", 123.4), exec_of("Supply-Truck", 55, "t1")};
  std::vector<sim::TourExecution> b{exec_of("CEP-Vehicle", 700, "t2")};
  std::vector<sim::TourExecution> both = a;
  both.insert(both.end(), b.begin(), b.end());
  CHECK(emissions(both, f).total_t ==
        doctest::Approx(emissions(a, f).total_t + emissions(b, f).total_t).epsilon(1e-12));
}

TEST_CASE("load_factor: tour means, shuttle excluded, empty flagged") {
  std::vector<sim::SolvedPlan> plans{plan_with_tour("CEP-Vehicle", net::Mode::road, 184, 230)};
  auto lf = load_factor(plans);
  REQUIRE(lf.defined);
  CHECK(lf.value == doctest::Approx(0.8));

  plans.push_back(plan_with_tour("Freight Shuttle", net::Mode::tunnel, 140, 140));
  lf = load_factor(plans);
  CHECK(lf.tours == 1);  // shuttle tour ignored
  CHECK(lf.value == doctest::Approx(0.8));

  plans.push_back(plan_with_tour("CEP-Vehicle", net::Mode::road, 230, 230));
  plans.push_back(plan_with_tour("CEP-Vehicle", net::Mode::road, 138, 230));  // 0.6
  lf = load_factor(plans);
  CHECK(lf.value == doctest::Approx((0.8 + 1.0 + 0.6) / 3));

  CHECK_FALSE(load_factor({}).defined);
}

TEST_CASE("load_factor: full tours hit the upper bound") {
  std::vector<sim::SolvedPlan> plans{plan_with_tour("CEP-Vehicle", net::Mode::road, 230, 230),
                                     plan_with_tour("CEP-Cargo-Bike", net::Mode::bike, 23, 23)};
  auto lf = load_factor(plans);
  CHECK(lf.value == doctest::Approx(1.0));
}

TEST_CASE("tour_length_table: one row per tour, totals consistent") {
  CHECK(tour_length_table({}).empty());
  std::vector<sim::TourExecution> ex{exec_of("CEP-Vehicle", 30, "a", 115, 230),
                                     exec_of("CEP-Vehicle", 45, "b", 230, 230),
                                     exec_of("Supply-Truck", 12, "c", 800, 800)};
  auto rows = tour_length_table(ex);
  REQUIRE(rows.size() == 3);
  double km = 0;
  for (const auto& r : rows) km += r.km;
  CHECK(km == doctest::Approx(87.0));
  CHECK(rows[0].load_factor == doctest::Approx(0.5));
}

TEST_CASE("build_report: buckets and totals") {
  EmissionFactors f;
  std::vector<sim::TourExecution> ex{exec_of("CEP-Vehicle", 100, "a"),
                                     exec_of("Supply-Truck", 50, "b"),
                                     exec_of("Freight Shuttle", 200, "c"),
                                     exec_of("CEP-Cargo-Bike", 10, "d")};
  std::vector<sim::SolvedPlan> plans{plan_with_tour("CEP-Vehicle", net::Mode::road, 200, 230,
                                                    100000, 3600)};
  auto r = build_report("whu-b", ex, plans, f);
  CHECK(r.ground_distance_km == doctest::Approx(150));
  CHECK(r.shuttle_distance_km == doctest::Approx(200));
  CHECK(r.bike_distance_km == doctest::Approx(10));
  CHECK(r.total_distance_km ==
        doctest::Approx(r.ground_distance_km + r.shuttle_distance_km + r.bike_distance_km)
            .epsilon(1e-9));
  CHECK(nearly_equal(r.co2_total_t, 100 * 197.295 / 1e6 + 50 * 789.505 / 1e6, 1e-9));
  CHECK(r.vehicles_used.at("light_commercial") == doctest::Approx(1));
  // 48.8 + 100000 * 0.00037 + 3600 * 0.0063
  CHECK(r.operating_cost.at("light_commercial") == doctest::Approx(48.8 + 37.0 + 22.68));
}

TEST_CASE("aggregate_replications: identity, mean, idempotence, mixed error") {
  KpiReport a;
  a.scenario = "bc";
  a.total_distance_km = 100;
  a.ground_distance_km = 100;
  a.load_defined = true;
  a.average_ground_vehicle_load = 0.8;
  a.vehicles_used["light_commercial"] = 10;

  auto single = aggregate_replications({a});
  CHECK(single.total_distance_km == doctest::Approx(100));
  CHECK(single.average_ground_vehicle_load == doctest::Approx(0.8));

  KpiReport b = a, c = a;
  b.total_distance_km = 110;
  c.total_distance_km = 120;
  auto mean = aggregate_replications({a, b, c});
  CHECK(mean.total_distance_km == doctest::Approx(110));

  auto same = aggregate_replications({a, a, a});
  CHECK(same.total_distance_km == doctest::Approx(a.total_distance_km));
  CHECK(same.vehicles_used.at("light_commercial") == doctest::Approx(10));

  KpiReport other = a;
  other.scenario = "whu";
  CHECK_THROWS(aggregate_replications({a, other}));
}

TEST_CASE("compare: percent changes and zero-base guard") {
  KpiReport base, variant;
  base.scenario = "bc";
  variant.scenario = "shu";
  base.co2_total_t = 55.24;
  variant.co2_total_t = 38.28;
  auto d = compare(base, variant);
  REQUIRE(d.at("co2_total_t").pct_defined);
  CHECK(d.at("co2_total_t").pct == doctest::Approx(-30.7).epsilon(0.002));

  auto same = compare(base, base);
  for (const auto& [field, fd] : same) {
    (void)field;
    CHECK(fd.delta == doctest::Approx(0.0));
  }

  CHECK_FALSE(d.at("bike_distance_km").pct_defined);  // base 0 flagged, not infinity
}

TEST_CASE("report JSON round-trip") {
  KpiReport r;
  r.scenario = "shu";
  r.total_distance_km = 123.5;
  r.ground_distance_km = 100;
  r.shuttle_distance_km = 23.5;
  r.load_defined = true;
  r.average_ground_vehicle_load = 0.77;
  r.co2_light_commercial_t = 0.1;
  r.co2_heavy_duty_t = 0.2;
  r.co2_total_t = 0.3;
  r.vehicles_used["shuttle"] = 4;
  r.operating_cost["shuttle"] = 456.7;
  auto text = report_to_json(r);
  auto back = report_from_json(text);
  CHECK(report_to_json(back) == text);
}
