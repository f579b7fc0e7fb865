#include "subterra/sim.hpp"

#include <algorithm>
#include <set>

#include "subterra/csv.hpp"

namespace subterra::sim {

ExecutionResult execute(const std::vector<SolvedPlan>& plans, const net::Network& network) {
  ExecutionResult result;

  for (const SolvedPlan& plan : plans) {
    std::map<std::string, const vrp::Job*> jobs_by_id;
    for (const auto& j : plan.jobs) jobs_by_id[j.id] = &j;

    for (const vrp::Tour& tour : plan.solution.tours) {
      TourExecution ex;
      ex.tour_id = tour.id;
      ex.vehicle_type = tour.vehicle_type;
      ex.mode = tour.mode;
      ex.start_node = tour.start_location;
      ex.start_s = tour.start_s;
      ex.initial_load = tour.initial_load;
      ex.capacity = tour.capacity;

      Seconds t = tour.start_s;
      std::string current = tour.start_location;

      auto drive = [&](const std::string& to, const std::string& leg_name) {
        if (to == current) return;
        auto path = network.shortest_path(current, to, t, tour.mode, /*time_dependent=*/true);
        if (!path.found)
          throw std::runtime_error("execute: tour '" + tour.id + "' leg to " + leg_name +
                                   " unreachable (" + current + " -> " + to + ")");
        for (const auto& link_id : path.links) {
          Seconds tt = network.travel_time(link_id, t);
          ex.links.push_back({link_id, t, t + tt});
          result.link_loads[{link_id, hour_of(t), tour.vehicle_type}] += 1;
          ex.total_m += network.link(link_id).length_m;
          t += tt;
        }
        current = to;
      };

      for (const vrp::Activity& act : tour.activities) {
        drive(act.location, "job '" + act.job_id + "'");
        RealizedActivity ra;
        ra.job_id = act.job_id;
        ra.kind = act.kind;
        ra.node = act.location;
        ra.arrival_s = t;

        const vrp::Job* job = jobs_by_id.count(act.job_id) ? jobs_by_id.at(act.job_id) : nullptr;
        Seconds op = t;
        if (job) {
          const auto& w =
              act.kind == vrp::ActivityKind::pickup ? job->pickup_window : job->window;
          if (w) {
            if (op < w->earliest) op = w->earliest;
            if (op > w->latest) ra.lateness_s = op - w->latest;
          }
        }
        ra.op_s = op;
        t = op + (job ? job->service_duration_s : 0.0);
        ra.departure_s = t;
        ex.activities.push_back(std::move(ra));
      }
      drive(tour.start_location, "tour end");

      ex.end_s = t;
      ex.total_s = t - tour.start_s;
      result.executions.push_back(std::move(ex));
    }
  }
  return result;
}

std::vector<DepartureRecord> extract_departures(const std::vector<TourExecution>& executions,
                                                const std::vector<demand::Hub>& hubs) {
  std::map<std::string, std::string> hub_by_node;
  for (const auto& h : hubs) hub_by_node[h.node_id] = h.id;

  std::vector<DepartureRecord> records;
  for (const auto& ex : executions) {
    auto it = hub_by_node.find(ex.start_node);
    if (it == hub_by_node.end()) continue;
    records.push_back({it->second, ex.tour_id, ex.start_s, ex.initial_load});
  }
  return records;
}

std::map<LinkLoadKey, int> diff_link_loads(const LinkLoads& base, const LinkLoads& variant) {
  std::map<LinkLoadKey, int> delta;
  for (const auto& [key, count] : base) delta[key] -= count;
  for (const auto& [key, count] : variant) delta[key] += count;
  return delta;
}

void write_executions_csv(const std::vector<TourExecution>& executions, const std::string& path) {
  csv::Writer w({"tour_id", "vehicle_type", "start_s", "end_s", "total_m", "total_s"});
  for (const auto& ex : executions)
    w.row({ex.tour_id, ex.vehicle_type, format_double(ex.start_s), format_double(ex.end_s),
           format_double(ex.total_m), format_double(ex.total_s)});
  w.save(path);
}

std::vector<ExecutionRow> read_executions_csv(const std::string& path) {
  auto t = csv::read_file(path);
  int c_tour = t.column("tour_id"), c_vt = t.column("vehicle_type");
  int c_start = t.column("start_s"), c_end = t.column("end_s");
  int c_m = t.column("total_m"), c_s = t.column("total_s");
  std::vector<ExecutionRow> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    rows.push_back({row[c_tour], row[c_vt], parse_double(row[c_start], t.where(r)),
                    parse_double(row[c_end], t.where(r)), parse_double(row[c_m], t.where(r)),
                    parse_double(row[c_s], t.where(r))});
  }
  return rows;
}

void write_link_loads_csv(const LinkLoads& loads, const std::string& path) {
  csv::Writer w({"link_id", "hour", "vehicle_type", "count"});
  for (const auto& [key, count] : loads)
    w.row({key.link_id, std::to_string(key.hour), key.vehicle_type, std::to_string(count)});
  w.save(path);
}

LinkLoads read_link_loads_csv(const std::string& path) {
  auto t = csv::read_file(path);
  int c_link = t.column("link_id"), c_hour = t.column("hour");
  int c_vt = t.column("vehicle_type"), c_count = t.column("count");
  LinkLoads loads;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    loads[{row[c_link], static_cast<int>(parse_int(row[c_hour], t.where(r))), row[c_vt]}] =
        static_cast<int>(parse_int(row[c_count], t.where(r)));
  }
  return loads;
}

void write_departures_csv(const std::vector<DepartureRecord>& departures,
                          const std::string& path) {
  csv::Writer w({"hub_id", "tour_id", "departure_s", "parcels"});
  for (const auto& d : departures)
    w.row({d.hub_id, d.tour_id, format_double(d.departure_s), std::to_string(d.parcels)});
  w.save(path);
}

std::vector<DepartureRecord> read_departures_csv(const std::string& path) {
  auto t = csv::read_file(path);
  int c_hub = t.column("hub_id"), c_tour = t.column("tour_id");
  int c_dep = t.column("departure_s"), c_parcels = t.column("parcels");
  std::vector<DepartureRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    out.push_back({row[c_hub], row[c_tour], parse_double(row[c_dep], t.where(r)),
                   static_cast<int>(parse_int(row[c_parcels], t.where(r)))});
  }
  return out;
}

}  // namespace subterra::sim
