#include "subterra/network.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "subterra/csv.hpp"

namespace subterra::net {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::road: return "road";
    case Mode::tunnel: return "tunnel";
    case Mode::bike: return "bike";
  }
  return "?";
}

Mode parse_mode(const std::string& s, const std::string& where) {
  if (s == "road") return Mode::road;
  if (s == "tunnel") return Mode::tunnel;
  if (s == "bike") return Mode::bike;
  throw std::runtime_error(where + ": unknown mode '" + s + "'");
}

int TravelTimeMatrix::index_of(const std::string& location) const {
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (locations[i] == location) return static_cast<int>(i);
  return -1;
}

const Node& Network::node(const std::string& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw std::runtime_error("unknown node '" + id + "'");
  return nodes_[it->second];
}

const Link& Network::link(const std::string& id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end()) throw std::runtime_error("unknown link '" + id + "'");
  return links_[it->second];
}

void Network::build(std::vector<Node> nodes, std::vector<Link> links,
                    std::vector<SpeedProfileEntry> entries) {
  nodes_ = std::move(nodes);
  links_ = std::move(links);
  profile_entries_ = std::move(entries);

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_index_.emplace(nodes_[i].id, static_cast<int>(i)).second)
      throw std::runtime_error("duplicate node id '" + nodes_[i].id + "'");
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (!link_index_.emplace(l.id, static_cast<int>(i)).second)
      throw std::runtime_error("duplicate link id '" + l.id + "'");
    if (!node_index_.count(l.from))
      throw std::runtime_error("link '" + l.id + "': unknown node '" + l.from + "'");
    if (!node_index_.count(l.to))
      throw std::runtime_error("link '" + l.id + "': unknown node '" + l.to + "'");
    if (l.from == l.to) throw std::runtime_error("link '" + l.id + "': self-loop forbidden");
    if (!(l.length_m > 0))
      throw std::runtime_error("link '" + l.id + "': non-positive length");
    if (!(l.freeflow_mps > 0))
      throw std::runtime_error("link '" + l.id + "': non-positive freeflow speed");
  }

  out_links_.assign(nodes_.size(), {});
  for (std::size_t i = 0; i < links_.size(); ++i)
    out_links_[node_index_[links_[i].from]].push_back(static_cast<int>(i));
  for (auto& out : out_links_)
    std::sort(out.begin(), out.end(),
              [&](int a, int b) { return links_[a].id < links_[b].id; });

  profiles_.assign(links_.size(), std::nullopt);
  for (const auto& e : profile_entries_) {
    auto it = link_index_.find(e.link_id);
    if (it == link_index_.end())
      throw std::runtime_error("speed profile for unknown link '" + e.link_id + "'");
    if (e.hour < 0 || e.hour > 23)
      throw std::runtime_error("speed profile for link '" + e.link_id + "': hour " +
                               std::to_string(e.hour) + " out of range");
    if (!(e.speed_mps > 0))
      throw std::runtime_error("speed profile for link '" + e.link_id + "': non-positive speed");
    const Link& l = links_[it->second];
    if (e.speed_mps > 2.0 * l.freeflow_mps)
      throw std::runtime_error("speed profile for link '" + e.link_id +
                               "': speed exceeds 2x freeflow");
    auto& prof = profiles_[it->second];
    if (!prof) prof.emplace();
    if (prof->has[e.hour])
      throw std::runtime_error("duplicate speed profile entry for link '" + e.link_id +
                               "' hour " + std::to_string(e.hour));
    prof->has[e.hour] = true;
    prof->speed[e.hour] = e.speed_mps;
  }
}

Network Network::from_csv_text(const std::string& nodes_csv, const std::string& links_csv,
                               const std::string& profiles_csv) {
  auto nodes_t = csv::parse(nodes_csv, "nodes.csv");
  auto links_t = csv::parse(links_csv, "links.csv");

  std::vector<Node> nodes;
  {
    int c_id = nodes_t.column("id"), c_x = nodes_t.column("x"), c_y = nodes_t.column("y");
    for (std::size_t r = 0; r < nodes_t.rows.size(); ++r) {
      const auto& row = nodes_t.rows[r];
      nodes.push_back({row[c_id], parse_double(row[c_x], nodes_t.where(r)),
                       parse_double(row[c_y], nodes_t.where(r))});
    }
  }

  std::vector<Link> links;
  {
    int c_id = links_t.column("id"), c_from = links_t.column("from"), c_to = links_t.column("to");
    int c_len = links_t.column("length_m"), c_ff = links_t.column("freeflow_mps");
    int c_mode = links_t.column("mode");
    for (std::size_t r = 0; r < links_t.rows.size(); ++r) {
      const auto& row = links_t.rows[r];
      links.push_back({row[c_id], row[c_from], row[c_to],
                       parse_double(row[c_len], links_t.where(r)),
                       parse_double(row[c_ff], links_t.where(r)),
                       parse_mode(row[c_mode], links_t.where(r))});
    }
  }

  std::vector<SpeedProfileEntry> entries;
  if (!profiles_csv.empty()) {
    auto prof_t = csv::parse(profiles_csv, "speed_profiles.csv");
    int c_link = prof_t.column("link_id"), c_hour = prof_t.column("hour");
    int c_speed = prof_t.column("speed_mps");
    for (std::size_t r = 0; r < prof_t.rows.size(); ++r) {
      const auto& row = prof_t.rows[r];
      entries.push_back({row[c_link],
                         static_cast<int>(parse_int(row[c_hour], prof_t.where(r))),
                         parse_double(row[c_speed], prof_t.where(r))});
    }
  }

  Network n;
  n.build(std::move(nodes), std::move(links), std::move(entries));
  return n;
}

Network Network::load(const std::string& nodes_path, const std::string& links_path,
                      const std::string& profiles_path) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return from_csv_text(slurp(nodes_path), slurp(links_path),
                       profiles_path.empty() ? "" : slurp(profiles_path));
}

double Network::speed_at(const std::string& link_id, int hour) const {
  auto it = link_index_.find(link_id);
  if (it == link_index_.end()) throw std::runtime_error("unknown link '" + link_id + "'");
  const auto& prof = profiles_[it->second];
  if (prof && prof->has[hour]) return prof->speed[hour];
  return links_[it->second].freeflow_mps;
}

Seconds Network::travel_time(const std::string& link_id, Seconds enter_time) const {
  const Link& l = link(link_id);
  return l.length_m / speed_at(link_id, hour_of(enter_time));
}

Seconds Network::freeflow_time(const std::string& link_id) const {
  const Link& l = link(link_id);
  return l.length_m / l.freeflow_mps;
}

PathResult Network::shortest_path(const std::string& from, const std::string& to,
                                  Seconds depart_time, Mode mode, bool time_dependent) const {
  int src = node_index_.count(from) ? node_index_.at(from) : -1;
  int dst = node_index_.count(to) ? node_index_.at(to) : -1;
  if (src < 0) throw std::runtime_error("shortest_path: unknown node '" + from + "'");
  if (dst < 0) throw std::runtime_error("shortest_path: unknown node '" + to + "'");

  PathResult res;
  if (src == dst) {
    res.found = true;
    res.nodes = {from};
    return res;
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(nodes_.size(), inf);    // seconds from departure
  std::vector<double> dist(nodes_.size(), 0);      // meters along the chosen path
  std::vector<int> pred_link(nodes_.size(), -1);
  std::vector<char> settled(nodes_.size(), 0);

  using QItem = std::pair<double, int>;  // (cost, node)
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
  cost[src] = 0;
  queue.push({0.0, src});

  while (!queue.empty()) {
    auto [c, u] = queue.top();
    queue.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    if (u == dst) break;
    for (int li : out_links_[u]) {
      const Link& l = links_[li];
      if (l.mode != mode) continue;
      int v = node_index_.at(l.to);
      if (settled[v]) continue;
      double tt = time_dependent ? l.length_m / speed_at(l.id, hour_of(depart_time + c))
                                 : l.length_m / l.freeflow_mps;
      double nc = c + tt;
      if (nc < cost[v]) {
        cost[v] = nc;
        dist[v] = dist[u] + l.length_m;
        pred_link[v] = li;
        queue.push({nc, v});
      } else if (nc == cost[v] && pred_link[v] >= 0 && l.id < links_[pred_link[v]].id) {
        dist[v] = dist[u] + l.length_m;
        pred_link[v] = li;
        queue.push({nc, v});
      }
    }
  }

  if (cost[dst] == inf) return res;  // found == false

  res.found = true;
  res.seconds = cost[dst];
  res.meters = dist[dst];
  std::vector<int> rev;
  for (int v = dst; v != src;) {
    int li = pred_link[v];
    rev.push_back(li);
    v = node_index_.at(links_[li].from);
  }
  res.nodes.push_back(from);
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    res.links.push_back(links_[*it].id);
    res.nodes.push_back(links_[*it].to);
  }
  return res;
}

void Network::freeflow_all(int source, Mode mode, std::vector<double>& seconds,
                           std::vector<double>& meters) const {
  const double inf = std::numeric_limits<double>::infinity();
  seconds.assign(nodes_.size(), inf);
  meters.assign(nodes_.size(), 0);
  std::vector<char> settled(nodes_.size(), 0);
  std::vector<int> pred_link(nodes_.size(), -1);

  using QItem = std::pair<double, int>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
  seconds[source] = 0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    auto [c, u] = queue.top();
    queue.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    for (int li : out_links_[u]) {
      const Link& l = links_[li];
      if (l.mode != mode) continue;
      int v = node_index_.at(l.to);
      if (settled[v]) continue;
      double nc = c + l.length_m / l.freeflow_mps;
      if (nc < seconds[v]) {
        seconds[v] = nc;
        meters[v] = meters[u] + l.length_m;
        pred_link[v] = li;
        queue.push({nc, v});
      } else if (nc == seconds[v] && pred_link[v] >= 0 && l.id < links_[pred_link[v]].id) {
        meters[v] = meters[u] + l.length_m;
        pred_link[v] = li;
        queue.push({nc, v});
      }
    }
  }
}

std::unordered_map<std::string, std::pair<Seconds, Meters>> Network::freeflow_reach(
    const std::string& from, Mode mode) const {
  auto it = node_index_.find(from);
  if (it == node_index_.end()) throw std::runtime_error("freeflow_reach: unknown node '" + from + "'");
  std::vector<double> sec, met;
  freeflow_all(it->second, mode, sec, met);
  std::unordered_map<std::string, std::pair<Seconds, Meters>> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (sec[i] != std::numeric_limits<double>::infinity()) out[nodes_[i].id] = {sec[i], met[i]};
  return out;
}

TravelTimeMatrix Network::travel_time_matrix_partial(const std::vector<std::string>& locations,
                                                     Mode mode) const {
  TravelTimeMatrix m;
  m.locations = locations;
  std::size_t n = locations.size();
  m.seconds.assign(n * n, 0);
  m.meters.assign(n * n, 0);
  m.reachable.assign(n * n, 0);

  std::vector<double> sec, met;
  for (std::size_t i = 0; i < n; ++i) {
    int src = node_index_.count(locations[i]) ? node_index_.at(locations[i]) : -1;
    if (src < 0) throw std::runtime_error("travel_time_matrix: unknown node '" + locations[i] + "'");
    freeflow_all(src, mode, sec, met);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        m.reachable[m.at(i, j)] = 1;
        continue;
      }
      int dst = node_index_.count(locations[j]) ? node_index_.at(locations[j]) : -1;
      if (dst < 0)
        throw std::runtime_error("travel_time_matrix: unknown node '" + locations[j] + "'");
      if (sec[dst] != std::numeric_limits<double>::infinity()) {
        m.seconds[m.at(i, j)] = sec[dst];
        m.meters[m.at(i, j)] = met[dst];
        m.reachable[m.at(i, j)] = 1;
      }
    }
  }
  return m;
}

TravelTimeMatrix Network::travel_time_matrix(const std::vector<std::string>& locations,
                                             Mode mode) const {
  TravelTimeMatrix m = travel_time_matrix_partial(locations, mode);
  for (std::size_t i = 0; i < locations.size(); ++i)
    for (std::size_t j = 0; j < locations.size(); ++j)
      if (!m.is_reachable(i, j))
        throw std::runtime_error(std::string("travel_time_matrix: unreachable pair (") +
                                 locations[i] + ", " + locations[j] + ") in mode " +
                                 mode_name(mode));
  return m;
}

bool Network::touches_mode(const std::string& node_id, Mode mode) const {
  const Node& n = node(node_id);
  (void)n;
  for (const Link& l : links_)
    if (l.mode == mode && (l.from == node_id || l.to == node_id)) return true;
  return false;
}

void Network::write_csv(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  csv::Writer nodes({"id", "x", "y"});
  for (const Node& n : nodes_) nodes.row({n.id, format_double(n.x), format_double(n.y)});
  nodes.save(dir + "/nodes.csv");

  csv::Writer links({"id", "from", "to", "length_m", "freeflow_mps", "mode"});
  for (const Link& l : links_)
    links.row({l.id, l.from, l.to, format_double(l.length_m), format_double(l.freeflow_mps),
               mode_name(l.mode)});
  links.save(dir + "/links.csv");

  csv::Writer profiles({"link_id", "hour", "speed_mps"});
  for (const auto& e : profile_entries_)
    profiles.row({e.link_id, std::to_string(e.hour), format_double(e.speed_mps)});
  profiles.save(dir + "/speed_profiles.csv");
}

}  // namespace subterra::net
