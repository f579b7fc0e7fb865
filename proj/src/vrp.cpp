#include "subterra/vrp.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "subterra/rng.hpp"

namespace subterra::vrp {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Diagnostics under SUBTERRA_SOLVER_STATS=1.
std::atomic<long long> g_full_evals{0}, g_bound_prunes{0}, g_column_scans{0}, g_candidates{0};
}

const VehicleType& cep_vehicle() {
  static const VehicleType t{"CEP-Vehicle", 0.00037, 0.0063, 48.8, 230, net::Mode::road};
  return t;
}
const VehicleType& cep_cargo_bike() {
  static const VehicleType t{"CEP-Cargo-Bike", 0.000103, 0.0033, 3.27, 23, net::Mode::bike};
  return t;
}
const VehicleType& supply_truck() {
  static const VehicleType t{"Supply-Truck", 0.00086, 0.008, 140.0, 800, net::Mode::road};
  return t;
}
const VehicleType& freight_shuttle() {
  static const VehicleType t{"Freight Shuttle", 0.00035, 0.002, 30.0, 140, net::Mode::tunnel};
  return t;
}

const VehicleType& vehicle_type_by_name(const std::string& name) {
  if (name == cep_vehicle().name) return cep_vehicle();
  if (name == cep_cargo_bike().name) return cep_cargo_bike();
  if (name == supply_truck().name) return supply_truck();
  if (name == freight_shuttle().name) return freight_shuttle();
  throw std::runtime_error("unknown vehicle type '" + name + "'");
}

const char* activity_kind_name(ActivityKind k) {
  switch (k) {
    case ActivityKind::service: return "service";
    case ActivityKind::pickup: return "pickup";
    case ActivityKind::delivery: return "delivery";
  }
  return "?";
}

ActivityKind parse_activity_kind(const std::string& s) {
  if (s == "service") return ActivityKind::service;
  if (s == "pickup") return ActivityKind::pickup;
  if (s == "delivery") return ActivityKind::delivery;
  throw std::runtime_error("unknown activity kind '" + s + "'");
}

const net::TravelTimeMatrix& MatrixSet::for_mode(net::Mode m) const {
  auto it = by_mode.find(m);
  if (it == by_mode.end())
    throw std::runtime_error(std::string("no travel time matrix for mode ") + net::mode_name(m));
  return it->second;
}

const std::vector<std::string>& MatrixSet::locations() const {
  if (by_mode.empty()) throw std::runtime_error("empty MatrixSet");
  return by_mode.begin()->second.locations;
}

MatrixSet MatrixSet::single(net::TravelTimeMatrix m, net::Mode mode) {
  MatrixSet s;
  s.by_mode.emplace(mode, std::move(m));
  return s;
}

// ---------------------------------------------------------------------------
// Internal instance and schedule evaluation
// ---------------------------------------------------------------------------

namespace {

struct Stop {
  int job = -1;
  bool is_pickup = false;  // shipments only; services use false
};

struct Instance {
  std::vector<Job> jobs;  // canonical order (sorted by id)
  std::vector<FleetEntry> fleet;
  const MatrixSet* mats = nullptr;
  SolverParams params;

  std::unordered_map<std::string, int> loc_index;
  std::vector<int> job_loc;         // delivery/service location index
  std::vector<int> job_pickup_loc;  // -1 for services
  std::vector<char> job_windowed;   // any window on the job
  std::vector<int> entry_start;     // fleet start location index

  int loc(const std::string& name) const {
    auto it = loc_index.find(name);
    if (it == loc_index.end())
      throw std::runtime_error("vrp: location '" + name + "' missing from matrix");
    return it->second;
  }

  int stop_loc(const Stop& s) const {
    return s.is_pickup ? job_pickup_loc[s.job] : job_loc[s.job];
  }
  const std::optional<TimeWindow>& stop_window(const Stop& s) const {
    return s.is_pickup ? jobs[s.job].pickup_window : jobs[s.job].window;
  }
  bool mode_ok(int job, net::Mode mode) const {
    const auto& allowed = jobs[job].allowed_modes;
    return allowed.empty() || std::find(allowed.begin(), allowed.end(), mode) != allowed.end();
  }
};

Instance make_instance(const std::vector<Job>& jobs, const std::vector<FleetEntry>& fleet,
                       const MatrixSet& mats, const SolverParams& params) {
  Instance inst;
  inst.jobs = jobs;
  std::sort(inst.jobs.begin(), inst.jobs.end(),
            [](const Job& a, const Job& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < inst.jobs.size(); ++i)
    if (inst.jobs[i].id == inst.jobs[i - 1].id)
      throw std::invalid_argument("duplicate job id '" + inst.jobs[i].id + "'");
  for (const Job& j : inst.jobs) {
    if (j.size < 1) throw std::invalid_argument("job '" + j.id + "': size must be >= 1");
    if (j.kind == JobKind::shipment && j.pickup_location == j.location)
      throw std::invalid_argument("job '" + j.id + "': pickup equals delivery");
    if (j.window && j.window->earliest > j.window->latest)
      throw std::invalid_argument("job '" + j.id + "': inverted time window");
  }
  inst.fleet = fleet;
  inst.mats = &mats;
  inst.params = params;

  const auto& locs = mats.locations();
  for (const auto& [mode, m] : mats.by_mode)
    if (m.locations != locs)
      throw std::invalid_argument("MatrixSet matrices must share one location list");
  for (std::size_t i = 0; i < locs.size(); ++i) inst.loc_index.emplace(locs[i], i);

  inst.job_loc.resize(inst.jobs.size());
  inst.job_pickup_loc.assign(inst.jobs.size(), -1);
  inst.job_windowed.assign(inst.jobs.size(), 0);
  for (std::size_t i = 0; i < inst.jobs.size(); ++i) {
    inst.job_loc[i] = inst.loc(inst.jobs[i].location);
    if (inst.jobs[i].kind == JobKind::shipment)
      inst.job_pickup_loc[i] = inst.loc(inst.jobs[i].pickup_location);
    if (inst.jobs[i].window || inst.jobs[i].pickup_window) inst.job_windowed[i] = 1;
  }
  for (const FleetEntry& e : inst.fleet) inst.entry_start.push_back(inst.loc(e.start_location));
  return inst;
}

struct StopTimes {
  double arrival = 0;
  double op_start = 0;
  double departure = 0;
  int load_after = 0;
};

struct Sched {
  bool feasible = false;  // reachability + capacity + job modes
  double cost = kInf;     // fixed + distance + time + window penalty
  double meters = 0;
  double start = 0;
  double end = 0;
  double lateness = 0;
  double waiting = 0;  // total time spent waiting for windows to open
  int initial_load = 0;
};

// Forward schedule of one vehicle's stop sequence, provided through an
// indexable callable so insertion candidates need no temporary vectors. The
// tour starts at the vehicle's earliest start, shifted so it reaches the
// first window-constrained stop exactly at window open (the shift cannot
// change any operation time). Early arrivals wait; lateness accumulates past
// window end.
template <typename StopAt>
Sched evaluate_stops(const Instance& inst, int entry_idx, int vehicle_index, int count,
                     StopAt&& stop_at, std::vector<StopTimes>* detail = nullptr) {
  Sched out;
  const FleetEntry& entry = inst.fleet[entry_idx];
  const auto& m = inst.mats->for_mode(entry.type.mode);

  if (count == 0) {
    out.feasible = true;
    out.cost = 0;
    return out;
  }

  int initial = 0;
  for (int i = 0; i < count; ++i) {
    Stop s = stop_at(i);
    if (!inst.mode_ok(s.job, entry.type.mode)) return out;
    if (inst.jobs[s.job].kind == JobKind::service) initial += inst.jobs[s.job].size;
  }
  out.initial_load = initial;
  if (initial > entry.type.capacity) return out;

  int start_loc = inst.entry_start[entry_idx];

  // Reachability and running load.
  {
    int load = initial;
    int prev = start_loc;
    for (int i = 0; i < count; ++i) {
      Stop s = stop_at(i);
      int cur = inst.stop_loc(s);
      if (!m.reachable[m.at(prev, cur)]) return out;
      const Job& j = inst.jobs[s.job];
      if (j.kind == JobKind::service) load -= j.size;
      else if (s.is_pickup) load += j.size;
      else load -= j.size;
      if (load < 0 || load > entry.type.capacity) return out;
      prev = cur;
    }
    if (!m.reachable[m.at(prev, start_loc)]) return out;
  }

  double vehicle_earliest = entry.vehicle_earliest(vehicle_index);

  // Start-time shift toward the first windowed stop.
  double t0 = vehicle_earliest;
  {
    double tau = 0;
    int prev = start_loc;
    for (int i = 0; i < count; ++i) {
      Stop s = stop_at(i);
      int cur = inst.stop_loc(s);
      tau += m.seconds[m.at(prev, cur)];
      const auto& w = inst.stop_window(s);
      if (w) {
        if (w->earliest - tau > t0) t0 = w->earliest - tau;
        break;
      }
      tau += inst.jobs[s.job].service_duration_s;
      prev = cur;
    }
  }

  double t = t0;
  double meters = 0;
  double lateness = 0;
  double waiting = 0;
  int prev = start_loc;
  int load = initial;
  for (int i = 0; i < count; ++i) {
    Stop s = stop_at(i);
    int cur = inst.stop_loc(s);
    t += m.seconds[m.at(prev, cur)];
    meters += m.meters[m.at(prev, cur)];
    double arrival = t;
    const Job& j = inst.jobs[s.job];
    const auto& w = inst.stop_window(s);
    double op_start = arrival;
    if (w) {
      if (op_start < w->earliest) op_start = w->earliest;
      if (op_start > w->latest) lateness += op_start - w->latest;
      waiting += op_start - arrival;
    }
    t = op_start + j.service_duration_s;
    if (j.kind == JobKind::service) load -= j.size;
    else if (s.is_pickup) load += j.size;
    else load -= j.size;
    if (detail) detail->push_back({arrival, op_start, t, load});
    prev = cur;
  }
  t += m.seconds[m.at(prev, start_loc)];
  meters += m.meters[m.at(prev, start_loc)];

  out.feasible = true;
  out.meters = meters;
  out.start = t0;
  out.end = t;
  out.lateness = lateness;
  out.waiting = waiting;
  out.cost = entry.type.fixed_cost + meters * entry.type.cost_per_meter +
             (t - t0) * entry.type.cost_per_second +
             lateness * inst.params.window_penalty_per_s;
  return out;
}

Sched evaluate(const Instance& inst, int entry_idx, int vehicle_index,
               const std::vector<Stop>& seq, std::vector<StopTimes>* detail = nullptr) {
  return evaluate_stops(inst, entry_idx, vehicle_index, static_cast<int>(seq.size()),
                        [&](int i) { return seq[i]; }, detail);
}

// ---------------------------------------------------------------------------
// Solver state
// ---------------------------------------------------------------------------

struct TourState {
  int entry = 0;
  int vehicle_index = 0;
  std::vector<Stop> seq;

  // Caches rebuilt by refresh().
  Sched sched;
  std::vector<int> locs;                 // stop locations
  std::vector<int> load_after;           // onboard after each stop
  std::vector<int> prefix_max;           // running max of load_after
  std::vector<double> suffix_waiting;    // window waits at stops i..end
  std::vector<double> suffix_min_slack;  // min (latest - op time) over stops i..end
  std::vector<double> op_end;            // departure instant per stop
  int first_windowed = 0;                // index of the first windowed stop (len if none)
  bool windowed = false;
};

void refresh(const Instance& inst, TourState& ts) {
  std::vector<StopTimes> detail;
  ts.sched = evaluate(inst, ts.entry, ts.vehicle_index, ts.seq, &detail);
  ts.locs.clear();
  ts.load_after.clear();
  ts.prefix_max.clear();
  ts.op_end.clear();
  ts.windowed = false;
  ts.first_windowed = static_cast<int>(ts.seq.size());
  int load = ts.sched.initial_load;
  int run_max = load;
  for (std::size_t i = 0; i < ts.seq.size(); ++i) {
    const Stop& s = ts.seq[i];
    ts.locs.push_back(inst.stop_loc(s));
    const Job& j = inst.jobs[s.job];
    if (j.kind == JobKind::service) load -= j.size;
    else if (s.is_pickup) load += j.size;
    else load -= j.size;
    ts.load_after.push_back(load);
    run_max = std::max(run_max, load);
    ts.prefix_max.push_back(run_max);
    if (ts.sched.feasible) ts.op_end.push_back(detail[i].departure);
    if (inst.stop_window(s) && ts.first_windowed == static_cast<int>(ts.seq.size()))
      ts.first_windowed = static_cast<int>(i);
    if (inst.job_windowed[s.job]) ts.windowed = true;
  }
  ts.suffix_waiting.assign(ts.seq.size() + 1, 0.0);
  ts.suffix_min_slack.assign(ts.seq.size() + 1, kInf);
  if (ts.sched.feasible)
    for (int i = static_cast<int>(ts.seq.size()) - 1; i >= 0; --i) {
      ts.suffix_waiting[i] =
          ts.suffix_waiting[i + 1] + (detail[i].op_start - detail[i].arrival);
      double slack = kInf;
      const auto& w = inst.stop_window(ts.seq[i]);
      if (w) slack = w->latest - detail[i].op_start;
      ts.suffix_min_slack[i] = std::min(ts.suffix_min_slack[i + 1], slack);
    }
}

// Delta cost of inserting job j as a service at position p, or as a shipment
// with pickup at p and delivery slot q (both in original indices, p <= q).
// Windowless tours take the O(1) splice path; anything windowed falls back to
// a full allocation-free re-evaluation after a lower-bound check against
// `cutoff` (added travel cannot shrink, waits absorb at most Sched.waiting,
// and lateness never decreases when a stop is added).
double insert_delta(const Instance& inst, const TourState& ts, int j, int p, int q,
                    double cutoff = kInf) {
  const FleetEntry& entry = inst.fleet[ts.entry];
  const Job& job = inst.jobs[j];
  if (!inst.mode_ok(j, entry.type.mode)) return kInf;
  const auto& m = inst.mats->for_mode(entry.type.mode);
  int len = static_cast<int>(ts.seq.size());
  int start_loc = inst.entry_start[ts.entry];
  int cap = entry.type.capacity;

  auto loc_at = [&](int i) { return i < 0 || i >= len ? start_loc : ts.locs[i]; };
  auto reach = [&](int a, int b) { return m.reachable[m.at(a, b)] != 0; };
  auto splice_s = [&](int a, int x, int b) {
    return m.seconds[m.at(a, x)] + m.seconds[m.at(x, b)] - m.seconds[m.at(a, b)];
  };
  auto splice_m = [&](int a, int x, int b) {
    return m.meters[m.at(a, x)] + m.meters[m.at(x, b)] - m.meters[m.at(a, b)];
  };

  bool fast = !ts.windowed && !inst.job_windowed[j];

  // Added travel delays only stops at and after the insertion point. Suffix
  // waits plus a start-time shift can absorb some of it; whatever remains
  // beyond the suffix's tightest window slack must turn into lateness.
  double t0_slack = ts.sched.start -
                    entry.vehicle_earliest(ts.vehicle_index);
  auto lower_bound = [&](double ds_total, double ds_first, double dm, int first_pos) {
    double sw = first_pos <= len ? ts.suffix_waiting[first_pos] : 0.0;
    double slack = first_pos <= len ? ts.suffix_min_slack[first_pos] : kInf;
    double bound = std::max(0.0, dm) * entry.type.cost_per_meter +
                   std::max(0.0, ds_total - sw - t0_slack) * entry.type.cost_per_second;
    if (slack != kInf) {
      double forced_late = ds_first - t0_slack - sw - std::max(0.0, slack);
      if (forced_late > 0) bound += forced_late * inst.params.window_penalty_per_s;
    }
    return bound;
  };

  if (job.kind == JobKind::service) {
    int jl = inst.job_loc[j];
    int before = loc_at(p - 1), after = loc_at(p);
    if (!reach(before, jl) || !reach(jl, after)) return kInf;
    int prefix = p > 0 ? ts.prefix_max[p - 1] : 0;
    if (std::max(ts.sched.initial_load, prefix) + job.size > cap) return kInf;
    double ds = splice_s(before, jl, after) + job.service_duration_s;
    double dm = splice_m(before, jl, after);
    if (fast) return dm * entry.type.cost_per_meter + ds * entry.type.cost_per_second;
    if (lower_bound(ds, ds, dm, p) >= cutoff) return kInf;
    Sched cand = evaluate_stops(inst, ts.entry, ts.vehicle_index, len + 1, [&](int i) {
      if (i < p) return ts.seq[i];
      if (i == p) return Stop{j, false};
      return ts.seq[i - 1];
    });
    return cand.feasible ? cand.cost - ts.sched.cost : kInf;
  }

  // Shipment: candidate = seq[0..p) P seq[p..q) D seq[q..len)
  int pl = inst.job_pickup_loc[j], dl = inst.job_loc[j];
  int load_before_p = p > 0 ? ts.load_after[p - 1] : ts.sched.initial_load;
  if (load_before_p + job.size > cap) return kInf;
  for (int i = p; i < q; ++i)
    if (ts.load_after[i] + job.size > cap) return kInf;

  double ds, ds_first, dm;
  if (p == q) {
    int a = loc_at(p - 1), b = loc_at(p);
    if (!reach(a, pl) || !reach(pl, dl) || !reach(dl, b)) return kInf;
    ds = m.seconds[m.at(a, pl)] + m.seconds[m.at(pl, dl)] + m.seconds[m.at(dl, b)] -
         m.seconds[m.at(a, b)];
    dm = m.meters[m.at(a, pl)] + m.meters[m.at(pl, dl)] + m.meters[m.at(dl, b)] -
         m.meters[m.at(a, b)];
    ds_first = ds;
  } else {
    int a = loc_at(p - 1), b = loc_at(p);
    int e = loc_at(q - 1), f = loc_at(q);
    if (!reach(a, pl) || !reach(pl, b) || !reach(e, dl) || !reach(dl, f)) return kInf;
    ds_first = splice_s(a, pl, b);
    ds = ds_first + splice_s(e, dl, f);
    dm = splice_m(a, pl, b) + splice_m(e, dl, f);
  }
  ds += 2 * job.service_duration_s;
  if (fast) return dm * entry.type.cost_per_meter + ds * entry.type.cost_per_second;

  double bound = lower_bound(ds, ds_first, dm, p);
  // Window mismatch terms: valid when the insertion cannot move the tour's
  // start (everything after first_windowed keeps its committed op times, which
  // only grow when stops are added). arr_lb/arr_ub bracket the delivery
  // arrival; arriving past window end is lateness, arriving far before window
  // open forces the vehicle to wait it out.
  if (job.window && p > ts.first_windowed) {
    double arr_lb, arr_ub;
    if (q == p) {
      // Prefix times are unchanged, so the delivery arrival is exact.
      arr_lb = ts.op_end[p - 1] + m.seconds[m.at(loc_at(p - 1), pl)] +
               job.service_duration_s + m.seconds[m.at(pl, dl)];
      arr_ub = arr_lb;
    } else {
      double leg = m.seconds[m.at(loc_at(q - 1), dl)];
      arr_lb = ts.op_end[q - 1] + leg;
      arr_ub = ts.op_end[q - 1] + ds_first + leg;
    }
    double late_lb = arr_lb - job.window->latest;
    if (late_lb > 0) bound += late_lb * inst.params.window_penalty_per_s;
    double wait_lb = job.window->earliest - arr_ub;
    if (wait_lb > 0) bound += wait_lb * entry.type.cost_per_second;
  }
  if (bound >= cutoff) {
    g_bound_prunes.fetch_add(1, std::memory_order_relaxed);
    return kInf;
  }

  g_full_evals.fetch_add(1, std::memory_order_relaxed);
  Sched cand = evaluate_stops(inst, ts.entry, ts.vehicle_index, len + 2, [&](int i) {
    if (i < p) return ts.seq[i];
    if (i == p) return Stop{j, true};
    if (i <= q) return ts.seq[i - 1];
    if (i == q + 1) return Stop{j, false};
    return ts.seq[i - 2];
  });
  return cand.feasible ? cand.cost - ts.sched.cost : kInf;
}

struct State {
  std::vector<TourState> tours;
  std::vector<std::vector<char>> used;  // per entry, vehicle indices in use
  std::vector<char> assigned;           // per job
  std::vector<int> unassignable;        // jobs no vehicle can ever carry
  double tours_cost = 0;
  int assigned_count = 0;
};

struct Insertion {
  bool found = false;
  double delta = kInf;
  int tour = -1;  // -1: open a new tour of entry `entry`
  int entry = -1;
  int pos = 0;
  int pos2 = 0;  // delivery slot for shipments
};

int next_vehicle_index(const State& st, int entry, int count) {
  for (int k = 0; k < count; ++k)
    if (!st.used[entry][k]) return k;
  return -1;
}

// Best insertion of job j into tour t, exact below `external_cutoff`:
// candidates that provably cannot beat the cutoff may be skipped. Positions
// scan in order and only strict improvements replace the incumbent, so ties
// resolve to the earliest position deterministically.
Insertion scan_tour(const Instance& inst, const State& st, int tour_idx, int j,
                    double external_cutoff = kInf) {
  const TourState& ts = st.tours[tour_idx];
  int len = static_cast<int>(ts.seq.size());
  g_column_scans.fetch_add(1, std::memory_order_relaxed);
  Insertion best;
  auto consider = [&](double delta, int p, int q) {
    g_candidates.fetch_add(1, std::memory_order_relaxed);
    if (delta < best.delta) best = {true, delta, tour_idx, ts.entry, p, q};
  };
  auto cutoff = [&]() { return std::min(best.delta, external_cutoff); };

  // Long tours would make the pickup/delivery pair scan cubic; deliveries
  // rarely pay off far from their pickup, so the slot span is capped.
  constexpr int kMaxDeliverySpan = 10;

  if (inst.jobs[j].kind == JobKind::service) {
    for (int p = 0; p <= len; ++p) consider(insert_delta(inst, ts, j, p, -1, cutoff()), p, -1);
  } else {
    for (int p = 0; p <= len; ++p) {
      int load_before_p = p > 0 ? ts.load_after[p - 1] : ts.sched.initial_load;
      if (load_before_p + inst.jobs[j].size > inst.fleet[ts.entry].type.capacity) continue;
      int q_max = std::min(len, p + kMaxDeliverySpan);
      for (int q = p; q <= q_max; ++q) {
        if (q > p && ts.load_after[q - 1] + inst.jobs[j].size >
                         inst.fleet[ts.entry].type.capacity)
          break;  // capacity broken for every later delivery slot
        consider(insert_delta(inst, ts, j, p, q, cutoff()), p, q);
      }
    }
  }
  if (best.found && best.delta >= external_cutoff) best.found = false;
  return best;
}

void scan_new_tour(const Instance& inst, const State& st, int j, Insertion& best,
                   Insertion* second = nullptr) {
  for (std::size_t e = 0; e < inst.fleet.size(); ++e) {
    int k = next_vehicle_index(st, static_cast<int>(e), inst.fleet[e].count);
    if (k < 0) continue;
    Stop stops[2];
    int count = 0;
    if (inst.jobs[j].kind == JobKind::shipment) stops[count++] = {j, true};
    stops[count++] = {j, false};
    Sched s = evaluate_stops(inst, static_cast<int>(e), k, count,
                             [&](int i) { return stops[i]; });
    if (!s.feasible) continue;
    if (s.cost < best.delta) {
      if (second) *second = best;
      best = {true, s.cost, -1, static_cast<int>(e), 0, 0};
    } else if (second && s.cost < second->delta) {
      *second = {true, s.cost, -1, static_cast<int>(e), 0, 0};
    }
  }
}

void apply_insertion(const Instance& inst, State& st, int j, const Insertion& ins) {
  if (ins.tour < 0) {
    TourState ts;
    ts.entry = ins.entry;
    ts.vehicle_index = next_vehicle_index(st, ins.entry, inst.fleet[ins.entry].count);
    if (inst.jobs[j].kind == JobKind::shipment) ts.seq.push_back({j, true});
    ts.seq.push_back({j, false});
    st.used[ins.entry][ts.vehicle_index] = 1;
    refresh(inst, ts);
    st.tours_cost += ts.sched.cost;
    st.tours.push_back(std::move(ts));
  } else {
    TourState& ts = st.tours[ins.tour];
    st.tours_cost -= ts.sched.cost;
    if (inst.jobs[j].kind == JobKind::service) {
      ts.seq.insert(ts.seq.begin() + ins.pos, Stop{j, false});
    } else {
      ts.seq.insert(ts.seq.begin() + ins.pos2, Stop{j, false});
      ts.seq.insert(ts.seq.begin() + ins.pos, Stop{j, true});
    }
    refresh(inst, ts);
    st.tours_cost += ts.sched.cost;
  }
  st.assigned[j] = 1;
  st.assigned_count += 1;
}

void remove_jobs(const Instance& inst, State& st, const std::vector<int>& jobs_to_remove) {
  std::vector<char> drop(inst.jobs.size(), 0);
  for (int j : jobs_to_remove) drop[j] = 1;
  std::vector<TourState> kept;
  kept.reserve(st.tours.size());
  st.tours_cost = 0;
  for (auto& ts : st.tours) {
    std::vector<Stop> seq;
    seq.reserve(ts.seq.size());
    bool changed = false;
    for (const Stop& s : ts.seq) {
      if (drop[s.job]) changed = true;
      else seq.push_back(s);
    }
    if (seq.empty()) {
      st.used[ts.entry][ts.vehicle_index] = 0;
      continue;
    }
    ts.seq = std::move(seq);
    if (changed) refresh(inst, ts);
    st.tours_cost += ts.sched.cost;
    kept.push_back(std::move(ts));
  }
  st.tours = std::move(kept);
  for (int j : jobs_to_remove) {
    st.assigned[j] = 0;
    st.assigned_count -= 1;
  }
}

double state_total_cost(const Instance& inst, const State& st) {
  int unassigned = 0;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (!st.assigned[j]) unassigned += 1;
  return st.tours_cost + unassigned * inst.params.unassigned_penalty;
}

// Insertion planner with a lazy per-(job, tour) cache. A cell is either exact
// (the true per-tour best) or a lower bound left behind by a pruned scan; a
// bounded cell is re-scanned only when its bound dips under the running
// second-best, so most columns are never evaluated exactly. The two cheapest
// options per job stay exact, which is all regret-2 and greedy need.
class InsertionPlanner {
 public:
  InsertionPlanner(const Instance& inst, State& st, std::vector<int> jobs)
      : inst_(inst), st_(st), jobs_(std::move(jobs)) {
    std::sort(jobs_.begin(), jobs_.end());
    cache_.assign(jobs_.size(), {});
    for (auto& row : cache_) row.assign(st_.tours.size(), Cell{});
  }

  bool pending() const { return !jobs_.empty(); }

  struct Option {
    Insertion best;
    Insertion second;
  };

  // Exact best and second-best insertion for the job across tour columns
  // (repaired lazily) and fresh new-tour options.
  Option options_for(std::size_t ji) {
    Option o;
    auto& row = cache_[ji];
    auto take = [&](const Insertion& c) {
      if (!c.found) return;
      if (c.delta < o.best.delta) {
        o.second = o.best;
        o.best = c;
      } else if (c.delta < o.second.delta) {
        o.second = c;
      }
    };
    for (std::size_t t = 0; t < row.size(); ++t)
      if (row[t].exact) take(row[t].ins);
    for (std::size_t t = 0; t < row.size(); ++t) {
      if (row[t].exact) continue;
      double cutoff = o.second.found ? o.second.delta : kInf;
      if (row[t].bound >= cutoff) continue;
      rescan(ji, t, cutoff);
      if (row[t].exact) take(row[t].ins);
    }
    scan_new_tour(inst_, st_, jobs_[ji], o.best, &o.second);
    return o;
  }

  // Applies the insertion and invalidates the changed column.
  int commit(std::size_t ji, const Insertion& ins) {
    int job = jobs_[ji];
    bool appended = ins.tour < 0;
    apply_insertion(inst_, st_, job, ins);
    std::size_t changed = appended ? st_.tours.size() - 1 : static_cast<std::size_t>(ins.tour);
    jobs_.erase(jobs_.begin() + ji);
    cache_.erase(cache_.begin() + ji);
    for (auto& row : cache_) {
      if (appended) row.push_back(Cell{});
      else row[changed] = Cell{};
    }
    return job;
  }

  const std::vector<int>& jobs() const { return jobs_; }

 private:
  struct Cell {
    Insertion ins;
    bool exact = false;
    double bound = -kInf;  // the scan that skipped this column used this cutoff
  };

  void rescan(std::size_t ji, std::size_t tour_idx, double cutoff) {
    Insertion best = scan_tour(inst_, st_, static_cast<int>(tour_idx), jobs_[ji], cutoff);
    if (best.found) cache_[ji][tour_idx] = {best, true, -kInf};
    else cache_[ji][tour_idx] = {Insertion{}, false, cutoff};
  }

  const Instance& inst_;
  State& st_;
  std::vector<int> jobs_;
  std::vector<std::vector<Cell>> cache_;
};

// Regret-2 construction: insert the job whose best option beats its runner-up
// by the widest margin; forced jobs (single option) go first.
void construct(const Instance& inst, State& st, const std::vector<int>& open_jobs) {
  InsertionPlanner planner(inst, st, open_jobs);
  while (planner.pending()) {
    double best_regret = -kInf;
    int pick = -1;
    Insertion pick_ins;
    const auto& jobs = planner.jobs();
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
      auto o = planner.options_for(ji);
      if (!o.best.found) continue;
      double regret = o.second.found ? o.second.delta - o.best.delta : kInf;
      bool better = false;
      if (regret > best_regret) better = true;
      else if (regret == best_regret && pick >= 0 &&
               inst.jobs[jobs[ji]].size > inst.jobs[pick].size)
        better = true;
      if (better) {
        best_regret = regret;
        pick = jobs[ji];
        pick_ins = o.best;
      }
    }
    if (pick < 0) break;  // remaining jobs are uninsertable
    const auto& js = planner.jobs();
    std::size_t pick_idx = std::find(js.begin(), js.end(), pick) - js.begin();
    planner.commit(pick_idx, pick_ins);
    if (std::getenv("SUBTERRA_SOLVER_STATS") && planner.jobs().size() % 25 == 0) {
      std::size_t max_len = 0;
      for (const auto& t : st.tours) max_len = std::max(max_len, t.seq.size());
      std::fprintf(stderr,
                   "[solver-stats] construct left=%zu tours=%zu max_len=%zu evals=%lld prunes=%lld\n",
                   planner.jobs().size(), st.tours.size(), max_len, g_full_evals.load(),
                   g_bound_prunes.load());
    }
  }
}

// Greedy re-insertion: repeatedly apply the globally cheapest feasible
// insertion over the removed set.
void greedy_insert(const Instance& inst, State& st, std::vector<int> pending) {
  InsertionPlanner planner(inst, st, std::move(pending));
  while (planner.pending()) {
    const auto& jobs = planner.jobs();
    double best_delta = kInf;
    std::size_t best_ji = 0;
    Insertion best_ins;
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
      auto o = planner.options_for(ji);
      if (o.best.found && o.best.delta < best_delta) {
        best_delta = o.best.delta;
        best_ji = ji;
        best_ins = o.best;
      }
    }
    if (best_delta == kInf) break;  // nothing else fits
    planner.commit(best_ji, best_ins);
  }
}

Solution build_solution(const Instance& inst, const State& st) {
  Solution sol;
  sol.window_penalty_per_s = inst.params.window_penalty_per_s;
  sol.unassigned_penalty = inst.params.unassigned_penalty;

  double window_penalty = 0;
  int k = 0;
  for (std::size_t t = 0; t < st.tours.size(); ++t) {
    const TourState& ts = st.tours[t];
    const FleetEntry& entry = inst.fleet[ts.entry];
    std::vector<StopTimes> detail;
    Sched sc = evaluate(inst, ts.entry, ts.vehicle_index, ts.seq, &detail);
    if (!sc.feasible) throw std::logic_error("vrp: infeasible tour in final state");

    Tour tour;
    tour.id = "t" + std::to_string(k++);
    tour.vehicle_type = entry.type.name;
    tour.mode = entry.type.mode;
    tour.start_location = entry.start_location;
    tour.fleet_entry = ts.entry;
    tour.vehicle_index = ts.vehicle_index;
    tour.start_s = sc.start;
    tour.end_s = sc.end;
    tour.initial_load = sc.initial_load;
    tour.capacity = entry.type.capacity;
    tour.planned_meters = sc.meters;
    for (std::size_t i = 0; i < ts.seq.size(); ++i) {
      const Stop& s = ts.seq[i];
      const Job& j = inst.jobs[s.job];
      Activity a;
      a.job_id = j.id;
      a.kind = j.kind == JobKind::service ? ActivityKind::service
               : s.is_pickup              ? ActivityKind::pickup
                                          : ActivityKind::delivery;
      a.location = s.is_pickup ? j.pickup_location : j.location;
      a.arrival_s = detail[i].arrival;
      a.departure_s = detail[i].departure;
      a.load_after = detail[i].load_after;
      tour.activities.push_back(std::move(a));
    }
    sol.tours.push_back(std::move(tour));

    sol.route_cost += entry.type.fixed_cost + sc.meters * entry.type.cost_per_meter +
                      (sc.end - sc.start) * entry.type.cost_per_second;
    window_penalty += sc.lateness * inst.params.window_penalty_per_s;
  }

  for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
    if (st.assigned[j]) continue;
    bool cap = std::find(st.unassignable.begin(), st.unassignable.end(), static_cast<int>(j)) !=
               st.unassignable.end();
    sol.unassigned.push_back(
        {inst.jobs[j].id, cap ? "size exceeds every vehicle capacity" : "no feasible insertion"});
  }

  sol.penalty_cost = window_penalty + sol.unassigned.size() * inst.params.unassigned_penalty;
  sol.total_cost = sol.route_cost + sol.penalty_cost;
  return sol;
}

State make_state(const Instance& inst) {
  State st;
  st.used.resize(inst.fleet.size());
  for (std::size_t e = 0; e < inst.fleet.size(); ++e)
    st.used[e].assign(std::max(inst.fleet[e].count, 0), 0);
  st.assigned.assign(inst.jobs.size(), 0);
  int max_cap = 0;
  for (const FleetEntry& e : inst.fleet) max_cap = std::max(max_cap, e.type.capacity);
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (inst.jobs[j].size > max_cap) st.unassignable.push_back(static_cast<int>(j));
  return st;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

Solution solve(const std::vector<Job>& jobs, const std::vector<FleetEntry>& fleet,
               const MatrixSet& matrices, const SolverParams& params) {
  if (params.iterations < 1) throw std::invalid_argument("solver: iterations must be >= 1");
  if (!(params.ruin_fraction > 0 && params.ruin_fraction < 1))
    throw std::invalid_argument("solver: ruin_fraction must be in (0,1)");

  Instance inst = make_instance(jobs, fleet, matrices, params);
  State st = make_state(inst);

  std::vector<int> open;
  for (std::size_t j = 0; j < inst.jobs.size(); ++j)
    if (std::find(st.unassignable.begin(), st.unassignable.end(), static_cast<int>(j)) ==
        st.unassignable.end())
      open.push_back(static_cast<int>(j));
  construct(inst, st, open);

  if (std::getenv("SUBTERRA_SOLVER_STATS"))
    std::fprintf(stderr,
                 "[solver-stats] constructed jobs=%zu tours=%zu scans=%lld cands=%lld evals=%lld "
                 "prunes=%lld\n",
                 inst.jobs.size(), st.tours.size(), g_column_scans.load(), g_candidates.load(),
                 g_full_evals.load(), g_bound_prunes.load());

  Rng rng(params.seed);
  double best_cost = state_total_cost(inst, st);

  // Proximity lookups for radial ruin use the first fleet mode's matrix.
  const net::TravelTimeMatrix* prox =
      inst.fleet.empty() ? nullptr : &inst.mats->for_mode(inst.fleet[0].type.mode);

  for (int it = 0; it < params.iterations; ++it) {
    if (st.assigned_count == 0) break;

    std::vector<int> assigned;
    assigned.reserve(st.assigned_count);
    for (std::size_t j = 0; j < inst.jobs.size(); ++j)
      if (st.assigned[j]) assigned.push_back(static_cast<int>(j));

    int ruin_count = static_cast<int>(
        std::ceil(params.ruin_fraction * static_cast<double>(assigned.size())));
    ruin_count = std::min<int>(ruin_count, static_cast<int>(assigned.size()));
    if (ruin_count == 0) break;

    std::vector<int> removed;
    if (it % 2 == 0) {
      // Random ruin.
      std::vector<int> pool = assigned;
      for (int r = 0; r < ruin_count; ++r) {
        int idx = rng.uniform_int(0, static_cast<int>(pool.size()) - 1);
        removed.push_back(pool[idx]);
        pool.erase(pool.begin() + idx);
      }
    } else {
      // Radial ruin around a random job.
      int center = assigned[rng.uniform_int(0, static_cast<int>(assigned.size()) - 1)];
      std::vector<std::pair<double, int>> by_dist;
      by_dist.reserve(assigned.size());
      for (int j : assigned) {
        double d = 0;
        if (prox) {
          std::size_t a = inst.job_loc[center], b = inst.job_loc[j];
          d = prox->reachable[prox->at(a, b)] ? prox->seconds[prox->at(a, b)] : kInf;
        }
        by_dist.push_back({d, j});
      }
      std::sort(by_dist.begin(), by_dist.end());
      for (int r = 0; r < ruin_count; ++r) removed.push_back(by_dist[r].second);
    }

    State snapshot = st;
    remove_jobs(inst, st, removed);
    greedy_insert(inst, st, removed);
    double cost = state_total_cost(inst, st);
    if (cost < best_cost) {
      best_cost = cost;
    } else {
      st = std::move(snapshot);
    }
    if (std::getenv("SUBTERRA_SOLVER_STATS") && (it + 1) % 50 == 0)
      std::fprintf(stderr, "[solver-stats] it=%d cost=%.3f scans=%lld evals=%lld prunes=%lld\n",
                   it + 1, best_cost, g_column_scans.load(), g_full_evals.load(),
                   g_bound_prunes.load());
  }

  if (std::getenv("SUBTERRA_SOLVER_STATS"))
    std::fprintf(stderr,
                 "[solver-stats] jobs=%zu column_scans=%lld candidates=%lld full_evals=%lld "
                 "bound_prunes=%lld\n",
                 inst.jobs.size(), g_column_scans.load(), g_candidates.load(),
                 g_full_evals.load(), g_bound_prunes.load());
  return build_solution(inst, st);
}

// ---------------------------------------------------------------------------
// brute force oracle
// ---------------------------------------------------------------------------

namespace {

struct SlotBest {
  double cost = kInf;
  std::vector<Stop> seq;
};

void enumerate_orders(const Instance& inst, int entry, int vindex, const std::vector<int>& members,
                      std::vector<Stop>& seq, std::vector<int>& picked_state, SlotBest& best) {
  // picked_state per member: 0 = untouched, 1 = pickup placed, 2 = done
  bool complete = true;
  for (std::size_t i = 0; i < members.size(); ++i) {
    int need = inst.jobs[members[i]].kind == JobKind::shipment ? 2 : 1;
    int have = picked_state[i] == 2 ? need : picked_state[i];
    if (have < need) complete = false;
  }
  if (complete) {
    Sched s = evaluate(inst, entry, vindex, seq);
    if (s.feasible && s.cost < best.cost) {
      best.cost = s.cost;
      best.seq = seq;
    }
    return;
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    const Job& j = inst.jobs[members[i]];
    if (j.kind == JobKind::service) {
      if (picked_state[i] != 0) continue;
      picked_state[i] = 2;
      seq.push_back({members[i], false});
      enumerate_orders(inst, entry, vindex, members, seq, picked_state, best);
      seq.pop_back();
      picked_state[i] = 0;
    } else {
      if (picked_state[i] == 0) {
        picked_state[i] = 1;
        seq.push_back({members[i], true});
        enumerate_orders(inst, entry, vindex, members, seq, picked_state, best);
        seq.pop_back();
        picked_state[i] = 0;
      } else if (picked_state[i] == 1) {
        picked_state[i] = 2;
        seq.push_back({members[i], false});
        enumerate_orders(inst, entry, vindex, members, seq, picked_state, best);
        seq.pop_back();
        picked_state[i] = 1;
      }
    }
  }
}

}  // namespace

Solution brute_force(const std::vector<Job>& jobs, const std::vector<FleetEntry>& fleet,
                     const MatrixSet& matrices, const SolverParams& params) {
  Instance inst = make_instance(jobs, fleet, matrices, params);
  int n = static_cast<int>(inst.jobs.size());
  if (n > 8) throw std::invalid_argument("brute_force: more than 8 jobs");

  // Vehicle slots: (entry, vehicle_index), capped at the job count per entry.
  std::vector<std::pair<int, int>> slots;
  for (std::size_t e = 0; e < inst.fleet.size(); ++e)
    for (int k = 0; k < std::min(inst.fleet[e].count, n); ++k)
      slots.push_back({static_cast<int>(e), k});
  if (slots.size() > 6) throw std::invalid_argument("brute_force: instance too large");

  // Optimal order per (slot, job subset).
  std::size_t masks = std::size_t(1) << n;
  std::vector<std::vector<SlotBest>> memo(slots.size());
  for (std::size_t s = 0; s < slots.size(); ++s) {
    memo[s].resize(masks);
    memo[s][0].cost = 0;
    for (std::size_t mask = 1; mask < masks; ++mask) {
      std::vector<int> members;
      for (int j = 0; j < n; ++j)
        if (mask & (std::size_t(1) << j)) members.push_back(j);
      std::vector<Stop> seq;
      std::vector<int> picked(members.size(), 0);
      enumerate_orders(inst, slots[s].first, slots[s].second, members, seq, picked, memo[s][mask]);
    }
  }

  // Assignment enumeration: choice 0 = unassigned, 1..slots = vehicle slot.
  std::vector<int> choice(n, 0);
  std::vector<int> best_choice;
  double best_cost = kInf;

  std::vector<std::size_t> slot_mask(slots.size(), 0);
  auto recurse = [&](auto&& self, int j) -> void {
    if (j == n) {
      double cost = 0;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        cost += memo[s][slot_mask[s]].cost;
        if (cost >= best_cost) return;
      }
      for (int i = 0; i < n; ++i)
        if (choice[i] == 0) cost += inst.params.unassigned_penalty;
      if (cost < best_cost) {
        best_cost = cost;
        best_choice = choice;
      }
      return;
    }
    for (int c = 0; c <= static_cast<int>(slots.size()); ++c) {
      choice[j] = c;
      if (c > 0) slot_mask[c - 1] |= std::size_t(1) << j;
      self(self, j + 1);
      if (c > 0) slot_mask[c - 1] &= ~(std::size_t(1) << j);
    }
  };
  recurse(recurse, 0);

  // Rebuild the winning state.
  State st = make_state(inst);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    std::size_t mask = 0;
    for (int j = 0; j < n; ++j)
      if (!best_choice.empty() && best_choice[j] == static_cast<int>(s) + 1)
        mask |= std::size_t(1) << j;
    if (!mask) continue;
    TourState ts;
    ts.entry = slots[s].first;
    ts.vehicle_index = slots[s].second;
    ts.seq = memo[s][mask].seq;
    st.used[ts.entry][ts.vehicle_index] = 1;
    refresh(inst, ts);
    st.tours_cost += ts.sched.cost;
    st.tours.push_back(std::move(ts));
    for (int j = 0; j < n; ++j)
      if (mask & (std::size_t(1) << j)) {
        st.assigned[j] = 1;
        st.assigned_count += 1;
      }
  }
  return build_solution(inst, st);
}

// ---------------------------------------------------------------------------
// route_cost and check_feasibility
// ---------------------------------------------------------------------------

RouteCostResult route_cost(const Solution& solution, const MatrixSet& matrices,
                           const std::vector<Job>& jobs) {
  RouteCostResult res;
  std::map<std::string, const Job*> by_id;
  for (const Job& j : jobs) by_id[j.id] = &j;

  for (const Tour& tour : solution.tours) {
    const VehicleType& vt = vehicle_type_by_name(tour.vehicle_type);
    const auto& m = matrices.for_mode(tour.mode);
    auto idx = [&](const std::string& loc) {
      int i = m.index_of(loc);
      if (i < 0) throw std::runtime_error("route_cost: location '" + loc + "' missing from matrix");
      return static_cast<std::size_t>(i);
    };

    double t = tour.start_s;
    double meters = 0;
    double lateness = 0;
    std::size_t prev = idx(tour.start_location);
    for (const Activity& a : tour.activities) {
      std::size_t cur = idx(a.location);
      t += m.seconds[m.at(prev, cur)];
      meters += m.meters[m.at(prev, cur)];
      const Job* job = by_id.count(a.job_id) ? by_id.at(a.job_id) : nullptr;
      const std::optional<TimeWindow>* w = nullptr;
      double duration = 0;
      if (job) {
        duration = job->service_duration_s;
        w = a.kind == ActivityKind::pickup ? &job->pickup_window : &job->window;
      }
      double op = t;
      if (w && *w) {
        if (op < (*w)->earliest) op = (*w)->earliest;
        if (op > (*w)->latest) lateness += op - (*w)->latest;
      }
      t = op + duration;
      prev = cur;
    }
    t += m.seconds[m.at(prev, idx(tour.start_location))];
    meters += m.meters[m.at(prev, idx(tour.start_location))];

    TourCost tc;
    tc.tour_id = tour.id;
    tc.fixed = vt.fixed_cost;
    tc.distance = meters * vt.cost_per_meter;
    tc.time = (t - tour.start_s) * vt.cost_per_second;
    tc.window_penalty = lateness * solution.window_penalty_per_s;
    res.route_cost += tc.fixed + tc.distance + tc.time;
    res.window_penalty += tc.window_penalty;
    res.tours.push_back(std::move(tc));
  }
  res.unassigned_penalty = solution.unassigned.size() * solution.unassigned_penalty;
  res.total = res.route_cost + res.window_penalty + res.unassigned_penalty;
  return res;
}

std::vector<Violation> check_feasibility(const Solution& solution, const std::vector<Job>& jobs) {
  std::vector<Violation> out;
  std::map<std::string, const Job*> by_id;
  for (const Job& j : jobs) by_id[j.id] = &j;

  for (const Tour& tour : solution.tours) {
    if (tour.initial_load > tour.capacity)
      out.push_back({ViolationKind::capacity, tour.id, "",
                     static_cast<double>(tour.initial_load - tour.capacity), false});

    std::map<std::string, int> pickup_pos, delivery_pos;
    for (std::size_t i = 0; i < tour.activities.size(); ++i) {
      const Activity& a = tour.activities[i];
      if (a.load_after < 0)
        out.push_back({ViolationKind::capacity, tour.id, a.job_id,
                       static_cast<double>(-a.load_after), false});
      if (a.load_after > tour.capacity)
        out.push_back({ViolationKind::capacity, tour.id, a.job_id,
                       static_cast<double>(a.load_after - tour.capacity), false});
      if (a.kind == ActivityKind::pickup) pickup_pos[a.job_id] = static_cast<int>(i);
      if (a.kind == ActivityKind::delivery) delivery_pos[a.job_id] = static_cast<int>(i);

      const Job* job = by_id.count(a.job_id) ? by_id.at(a.job_id) : nullptr;
      if (job) {
        const auto& w = a.kind == ActivityKind::pickup ? job->pickup_window : job->window;
        if (w) {
          double op = a.departure_s - job->service_duration_s;
          if (op < w->earliest)
            out.push_back({ViolationKind::time_window, tour.id, a.job_id, w->earliest - op, true});
          else if (op > w->latest)
            out.push_back({ViolationKind::time_window, tour.id, a.job_id, op - w->latest, false});
        }
      }
    }
    for (const auto& [job_id, dp] : delivery_pos) {
      auto it = pickup_pos.find(job_id);
      if (it == pickup_pos.end() || it->second > dp)
        out.push_back({ViolationKind::precedence, tour.id, job_id, 0, false});
    }
    for (const auto& [job_id, pp] : pickup_pos) {
      (void)pp;
      if (!delivery_pos.count(job_id))
        out.push_back({ViolationKind::precedence, tour.id, job_id, 0, false});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string solution_to_json(const std::string& plan_id, const std::string& carrier_id,
                             const Solution& s) {
  ordered_json doc;
  doc["plan_id"] = plan_id;
  doc["carrier_id"] = carrier_id;
  doc["tours"] = ordered_json::array();
  for (const Tour& t : s.tours) {
    ordered_json jt;
    jt["id"] = t.id;
    jt["vehicle_type"] = t.vehicle_type;
    jt["mode"] = net::mode_name(t.mode);
    jt["start_location"] = t.start_location;
    jt["fleet_entry"] = t.fleet_entry;
    jt["vehicle_index"] = t.vehicle_index;
    jt["start_s"] = t.start_s;
    jt["end_s"] = t.end_s;
    jt["initial_load"] = t.initial_load;
    jt["capacity"] = t.capacity;
    jt["planned_meters"] = t.planned_meters;
    jt["activities"] = ordered_json::array();
    for (const Activity& a : t.activities)
      jt["activities"].push_back({{"job_id", a.job_id},
                                  {"kind", activity_kind_name(a.kind)},
                                  {"node", a.location},
                                  {"arrival_s", a.arrival_s},
                                  {"departure_s", a.departure_s},
                                  {"load_after", a.load_after}});
    doc["tours"].push_back(std::move(jt));
  }
  doc["unassigned"] = ordered_json::array();
  for (const auto& u : s.unassigned)
    doc["unassigned"].push_back({{"job_id", u.job_id}, {"reason", u.reason}});
  doc["costs"] = {{"route", s.route_cost},
                  {"penalty", s.penalty_cost},
                  {"total", s.total_cost},
                  {"window_penalty_per_s", s.window_penalty_per_s},
                  {"unassigned_penalty", s.unassigned_penalty}};
  return doc.dump(2) + "\n";
}

Solution solution_from_json(const std::string& text, std::string* plan_id,
                            std::string* carrier_id) {
  ordered_json doc = ordered_json::parse(text);
  if (plan_id) *plan_id = doc.at("plan_id");
  if (carrier_id) *carrier_id = doc.at("carrier_id");
  Solution s;
  for (const auto& jt : doc.at("tours")) {
    Tour t;
    t.id = jt.at("id");
    t.vehicle_type = jt.at("vehicle_type");
    t.mode = net::parse_mode(jt.at("mode"), "solution tour");
    t.start_location = jt.at("start_location");
    t.fleet_entry = jt.at("fleet_entry");
    t.vehicle_index = jt.at("vehicle_index");
    t.start_s = jt.at("start_s");
    t.end_s = jt.at("end_s");
    t.initial_load = jt.at("initial_load");
    t.capacity = jt.at("capacity");
    t.planned_meters = jt.at("planned_meters");
    for (const auto& ja : jt.at("activities")) {
      Activity a;
      a.job_id = ja.at("job_id");
      a.kind = parse_activity_kind(ja.at("kind"));
      a.location = ja.at("node");
      a.arrival_s = ja.at("arrival_s");
      a.departure_s = ja.at("departure_s");
      a.load_after = ja.at("load_after");
      t.activities.push_back(std::move(a));
    }
    s.tours.push_back(std::move(t));
  }
  for (const auto& ju : doc.at("unassigned"))
    s.unassigned.push_back({ju.at("job_id"), ju.at("reason")});
  const auto& c = doc.at("costs");
  s.route_cost = c.at("route");
  s.penalty_cost = c.at("penalty");
  s.total_cost = c.at("total");
  s.window_penalty_per_s = c.at("window_penalty_per_s");
  s.unassigned_penalty = c.at("unassigned_penalty");
  return s;
}

void save_solution(const std::string& plan_id, const std::string& carrier_id, const Solution& s,
                   const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << solution_to_json(plan_id, carrier_id, s);
}

Solution load_solution(const std::string& path, std::string* plan_id, std::string* carrier_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return solution_from_json(ss.str(), plan_id, carrier_id);
}

}  // namespace subterra::vrp
