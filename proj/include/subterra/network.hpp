#pragma once

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "subterra/common.hpp"

namespace subterra::net {

enum class Mode { road, tunnel, bike };

const char* mode_name(Mode m);
Mode parse_mode(const std::string& s, const std::string& where);

struct Node {
  std::string id;
  double x = 0;
  double y = 0;
};

struct Link {
  std::string id;
  std::string from;
  std::string to;
  Meters length_m = 0;
  double freeflow_mps = 0;
  Mode mode = Mode::road;
};

struct SpeedProfileEntry {
  std::string link_id;
  int hour = 0;
  double speed_mps = 0;
};

struct PathResult {
  bool found = false;
  std::vector<std::string> nodes;
  std::vector<std::string> links;
  Seconds seconds = 0;
  Meters meters = 0;
};

// Square matrix of free-flow (seconds, meters) between a fixed location list.
// Entries may be marked unreachable when built with build_partial.
struct TravelTimeMatrix {
  std::vector<std::string> locations;
  std::vector<Seconds> seconds;        // n*n, row-major
  std::vector<Meters> meters;          // n*n
  std::vector<std::uint8_t> reachable; // n*n

  std::size_t size() const { return locations.size(); }
  std::size_t at(std::size_t i, std::size_t j) const { return i * locations.size() + j; }
  int index_of(const std::string& location) const;
  bool is_reachable(std::size_t i, std::size_t j) const { return reachable[at(i, j)] != 0; }
};

// Time-dependent multimodal graph. Immutable after load; concurrent read-only
// queries are safe.
//
// Link speed is sampled once at entry and held for the whole traversal
// (network-change-event semantics). Across hour boundaries this can violate
// FIFO; the label-setting search below uses the same entry-time rule, which is
// the accepted semantic for this model.
class Network {
 public:
  static Network load(const std::string& nodes_path, const std::string& links_path,
                      const std::string& profiles_path);  // profiles_path may be ""
  static Network from_csv_text(const std::string& nodes_csv, const std::string& links_csv,
                               const std::string& profiles_csv);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<SpeedProfileEntry>& profile_entries() const { return profile_entries_; }

  bool has_node(const std::string& id) const { return node_index_.count(id) > 0; }
  bool has_link(const std::string& id) const { return link_index_.count(id) > 0; }
  const Node& node(const std::string& id) const;
  const Link& link(const std::string& id) const;

  // Profile speed for the hour, falling back to the link's free-flow speed.
  double speed_at(const std::string& link_id, int hour) const;

  Seconds travel_time(const std::string& link_id, Seconds enter_time) const;
  Seconds freeflow_time(const std::string& link_id) const;

  // Minimal-travel-time path. The time-dependent variant evaluates each link
  // at its entry instant. Equal-cost ties break on lexicographic link id, so
  // results are reproducible. Unreachable targets return found == false.
  PathResult shortest_path(const std::string& from, const std::string& to, Seconds depart_time,
                           Mode mode, bool time_dependent) const;

  // Free-flow matrix over the locations; throws listing the first unreachable
  // pair. build_partial marks unreachable entries instead of throwing.
  TravelTimeMatrix travel_time_matrix(const std::vector<std::string>& locations, Mode mode) const;
  TravelTimeMatrix travel_time_matrix_partial(const std::vector<std::string>& locations,
                                              Mode mode) const;

  // One-to-all free-flow reach from a node: (seconds, meters) per reachable node.
  std::unordered_map<std::string, std::pair<Seconds, Meters>> freeflow_reach(
      const std::string& from, Mode mode) const;

  // True if any tunnel link touches the node.
  bool touches_mode(const std::string& node_id, Mode mode) const;

  void write_csv(const std::string& dir) const;  // nodes.csv, links.csv, speed_profiles.csv

 private:
  struct HourSpeeds {
    std::array<double, 24> speed{};
    std::array<bool, 24> has{};
  };

  void build(std::vector<Node> nodes, std::vector<Link> links,
             std::vector<SpeedProfileEntry> entries);

  // One-to-all free-flow Dijkstra used by the matrix builders.
  void freeflow_all(int source, Mode mode, std::vector<double>& seconds,
                    std::vector<double>& meters) const;

  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<SpeedProfileEntry> profile_entries_;
  std::unordered_map<std::string, int> node_index_;
  std::unordered_map<std::string, int> link_index_;
  std::vector<std::vector<int>> out_links_;  // per node, sorted by link id
  std::vector<std::optional<HourSpeeds>> profiles_;  // per link
};

}  // namespace subterra::net
