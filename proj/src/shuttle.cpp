#include "subterra/shuttle.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <set>

#include "subterra/csv.hpp"

namespace subterra::shuttle {

namespace {

// Portal with the smallest free-flow road time from the origin node; ties go
// to the lexicographically smaller portal id.
std::string nearest_portal(const net::Network& network, const std::vector<std::string>& portals,
                           const std::string& origin) {
  if (portals.empty()) throw std::runtime_error("derive_shipments: no portal nodes");
  auto reach = network.freeflow_reach(origin, net::Mode::road);
  std::string best;
  double best_s = std::numeric_limits<double>::infinity();
  std::vector<std::string> sorted = portals;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& p : sorted) {
    auto it = reach.find(p);
    if (it == reach.end()) continue;
    if (it->second.first < best_s) {
      best_s = it->second.first;
      best = p;
    }
  }
  if (best.empty())
    throw std::runtime_error("derive_shipments: no portal reachable by road from '" + origin + "'");
  return best;
}

}  // namespace

std::vector<ShuttleShipment> derive_shipments(const std::vector<sim::DepartureRecord>& departures,
                                              const std::vector<demand::SupplyJob>& supply_jobs,
                                              scenario::ScenarioKind kind,
                                              const DeriveContext& ctx) {
  if (kind == scenario::ScenarioKind::BC)
    throw std::invalid_argument("derive_shipments: no shuttle in the basecase");
  if (!ctx.demand || !ctx.network)
    throw std::invalid_argument("derive_shipments: context missing demand/network");

  const auto& ds = *ctx.demand;
  std::map<std::string, std::string> depot_of;
  for (const auto& c : ds.carriers) depot_of[c.id] = c.depot_node_id;

  std::vector<ShuttleShipment> shipments;

  for (const auto& dep : departures) {
    if (dep.parcels <= 0) {
      std::fprintf(stderr, "[subterra] warning: departure of tour %s has no parcels, skipped\n",
                   dep.tour_id.c_str());
      continue;
    }
    const demand::Hub* hub = ds.find_hub(dep.hub_id);
    if (!hub) throw std::runtime_error("derive_shipments: unknown hub '" + dep.hub_id + "'");

    auto it = ctx.tour_carrier_parcels.find(dep.tour_id);
    if (it == ctx.tour_carrier_parcels.end())
      throw std::runtime_error("derive_shipments: no provenance for tour '" + dep.tour_id + "'");

    // Parcels enter the tunnel at the portal nearest their carrier's depot;
    // carriers sharing a portal share shipment pieces.
    std::map<std::string, int> by_portal;
    for (const auto& [carrier, parcels] : it->second) {
      auto depot = depot_of.find(carrier);
      if (depot == depot_of.end())
        throw std::runtime_error("derive_shipments: unknown carrier '" + carrier + "'");
      by_portal[nearest_portal(*ctx.network, ds.portal_nodes, depot->second)] += parcels;
    }

    for (const auto& [portal, parcels] : by_portal) {
      int remaining = parcels;
      int piece = 0;
      while (remaining > 0) {
        int size = std::min(remaining, ctx.shuttle_capacity);
        ShuttleShipment s;
        s.id = "shp_" + dep.tour_id + "_" + portal + "_" + std::to_string(piece++);
        s.pickup_node = portal;
        s.delivery_node = hub->node_id;
        s.size = size;
        s.window_start_s = dep.departure_s - ctx.window_lead_s;
        s.window_end_s = dep.departure_s - ctx.window_close_s;
        shipments.push_back(std::move(s));
        remaining -= size;
      }
    }
  }

  std::vector<demand::SupplyJob> sorted_supply = supply_jobs;
  std::sort(sorted_supply.begin(), sorted_supply.end(),
            [](const demand::SupplyJob& a, const demand::SupplyJob& b) { return a.id < b.id; });
  for (const auto& job : sorted_supply) {
    if (ds.find_hub(job.destination)) continue;  // superseded by departure shipments
    const demand::Facility* f = ds.find_facility(job.destination);
    if (!f) throw std::runtime_error("derive_shipments: unknown destination '" + job.destination + "'");
    if (!scenario::tunnel_connected(*ctx.network, f->node_id)) continue;  // stays on trucks

    std::string portal = nearest_portal(*ctx.network, ds.portal_nodes, job.origin_depot_node);
    int remaining = job.size;
    int piece = 0;
    while (remaining > 0) {
      int size = std::min(remaining, ctx.shuttle_capacity);
      ShuttleShipment s;
      s.id = "shp_sup_" + job.id + "_" + std::to_string(piece++);
      s.pickup_node = portal;
      s.delivery_node = f->node_id;
      s.size = size;
      s.window_start_s = ctx.supply_window_start_s;
      s.window_end_s = ctx.supply_window_end_s;
      shipments.push_back(std::move(s));
      remaining -= size;
    }
  }
  return shipments;
}

std::vector<std::vector<ShuttleShipment>> partition_carriers(
    std::vector<ShuttleShipment> shipments, int k) {
  if (k < 1) throw std::invalid_argument("partition_carriers: k must be >= 1");
  std::sort(shipments.begin(), shipments.end(),
            [](const ShuttleShipment& a, const ShuttleShipment& b) {
              if (a.window_start_s != b.window_start_s) return a.window_start_s < b.window_start_s;
              return a.id < b.id;
            });
  std::vector<std::vector<ShuttleShipment>> parts(k);
  for (std::size_t i = 0; i < shipments.size(); ++i)
    parts[i % k].push_back(shipments[i]);
  return parts;
}

ShuttleRun plan_and_execute(const std::vector<std::vector<ShuttleShipment>>& partitions,
                            const net::Network& tunnel_network,
                            const vrp::SolverParams& params) {
  ShuttleRun run;

  // Partitions solve concurrently; each has its own derived seed and the
  // results are merged in partition order, so scheduling cannot change them.
  std::vector<sim::SolvedPlan> planned(partitions.size());
  parallel_for_index(partitions.size(), [&](std::size_t i) {
    const auto& part = partitions[i];
    if (part.empty()) return;

    sim::SolvedPlan plan;
    plan.plan_id = "shuttle_" + std::to_string(i);
    plan.carrier_id = plan.plan_id;

    std::set<std::string> locations;
    std::string start_portal;
    int total = 0;
    for (const auto& s : part) {
      vrp::Job j;
      j.id = s.id;
      j.kind = vrp::JobKind::shipment;
      j.pickup_location = s.pickup_node;
      j.location = s.delivery_node;
      j.size = s.size;
      j.window = vrp::TimeWindow{s.window_start_s, s.window_end_s};
      plan.jobs.push_back(std::move(j));
      locations.insert(s.pickup_node);
      locations.insert(s.delivery_node);
      if (start_portal.empty() || s.pickup_node < start_portal) start_portal = s.pickup_node;
      total += s.size;
    }
    locations.insert(start_portal);

    std::vector<std::string> locs(locations.begin(), locations.end());
    auto matrix = tunnel_network.travel_time_matrix(locs, net::Mode::tunnel);
    auto mats = vrp::MatrixSet::single(std::move(matrix), net::Mode::tunnel);

    vrp::FleetEntry entry;
    entry.type = vrp::freight_shuttle();
    entry.start_location = start_portal;
    entry.count = (total + entry.type.capacity - 1) / entry.type.capacity + 2;
    entry.earliest_start_s = 0;
    entry.start_stagger_s = 0;

    vrp::SolverParams p = params;
    p.seed = derive_seed(params.seed, "shuttle", i);
    plan.solution = vrp::solve(plan.jobs, {entry}, mats, p);
    for (auto& tour : plan.solution.tours) tour.id = plan.plan_id + "#" + tour.id;
    planned[i] = std::move(plan);
  });
  for (auto& plan : planned)
    if (!plan.plan_id.empty()) run.plans.push_back(std::move(plan));

  run.execution = sim::execute(run.plans, tunnel_network);

  for (const auto& ex : run.execution.executions) {
    for (const auto& act : ex.activities) {
      if (act.lateness_s > 0) {
        WindowViolation v;
        v.shipment_id = act.job_id;
        v.seconds_late_or_early = act.lateness_s;
        v.penalty = act.lateness_s * params.window_penalty_per_s;
        run.window_penalty += v.penalty;
        run.violations.push_back(std::move(v));
      }
    }
  }
  return run;
}

void write_shipments_csv(const std::vector<ShuttleShipment>& shipments, const std::string& path) {
  csv::Writer w({"id", "pickup_node", "delivery_node", "size", "window_start_s", "window_end_s"});
  for (const auto& s : shipments)
    w.row({s.id, s.pickup_node, s.delivery_node, std::to_string(s.size),
           format_double(s.window_start_s), format_double(s.window_end_s)});
  w.save(path);
}

std::vector<ShuttleShipment> read_shipments_csv(const std::string& path) {
  auto t = csv::read_file(path);
  int c_id = t.column("id"), c_pick = t.column("pickup_node"), c_del = t.column("delivery_node");
  int c_size = t.column("size"), c_ws = t.column("window_start_s"), c_we = t.column("window_end_s");
  std::vector<ShuttleShipment> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out.push_back({row[c_id], row[c_pick], row[c_del],
                   static_cast<int>(parse_int(row[c_size], t.where(r))),
                   parse_double(row[c_ws], t.where(r)), parse_double(row[c_we], t.where(r))});
  }
  return out;
}

void write_violations_csv(const std::vector<WindowViolation>& violations,
                          const std::string& path) {
  csv::Writer w({"shipment_id", "seconds_late_or_early", "penalty"});
  for (const auto& v : violations)
    w.row({v.shipment_id, format_double(v.seconds_late_or_early), format_double(v.penalty)});
  w.save(path);
}

std::vector<WindowViolation> read_violations_csv(const std::string& path) {
  auto t = csv::read_file(path);
  int c_id = t.column("shipment_id"), c_s = t.column("seconds_late_or_early");
  int c_p = t.column("penalty");
  std::vector<WindowViolation> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out.push_back({row[c_id], parse_double(row[c_s], t.where(r)), parse_double(row[c_p], t.where(r))});
  }
  return out;
}

}  // namespace subterra::shuttle
