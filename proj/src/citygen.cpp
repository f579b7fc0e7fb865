#include "subterra/citygen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

namespace subterra::citygen {

std::vector<FacilitySpec> CityConfig::default_facilities() {
  using demand::FacilityKind;
  return {
      {"ind_east", FacilityKind::industry, 4, 0.80, 0.55, true},
      {"ind_west", FacilityKind::industry, 3, 0.18, 0.30, true},
      {"retail_mall", FacilityKind::retail_center, 2, 0.50, 0.58, true},
      {"retail_east", FacilityKind::retail_center, 2, 0.85, 0.15, false},
      {"retail_west", FacilityKind::retail_center, 1, 0.15, 0.85, false},
  };
}

namespace {

std::string pad2(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

struct Builder {
  const CityConfig& cfg;
  std::string nodes_csv = "id,x,y\n";
  std::string links_csv = "id,from,to,length_m,freeflow_mps,mode\n";
  std::string profiles_csv = "link_id,hour,speed_mps\n";

  std::string node_id(int col, int row) const { return "n_" + pad2(col) + "_" + pad2(row); }

  int snap_col(double fx) const { return static_cast<int>(std::lround(fx * (cfg.grid_nx - 1))); }
  int snap_row(double fy) const { return static_cast<int>(std::lround(fy * (cfg.grid_ny - 1))); }
  std::string snap(double fx, double fy) const { return node_id(snap_col(fx), snap_row(fy)); }

  double x_of(int col) const { return col * cfg.spacing_m; }
  double y_of(int row) const { return row * cfg.spacing_m; }

  void road_link(const std::string& a, const std::string& b, double ax, double ay, double bx,
                 double by) {
    double len = std::hypot(bx - ax, by - ay);
    std::string id = "r_" + a + "__" + b;
    links_csv += id + "," + a + "," + b + "," + format_double(len) + "," +
                 format_double(cfg.road_speed_mps) + ",road\n";
    for (int h = 0; h < 24; ++h) {
      double f = cfg.hourly_speed_factor[h];
      if (f != 1.0)
        profiles_csv += id + "," + std::to_string(h) + "," +
                        format_double(cfg.road_speed_mps * f) + "\n";
    }
  }

  void bike_link(const std::string& a, const std::string& b, double len) {
    links_csv += "b_" + a + "__" + b + "," + a + "," + b + "," + format_double(len) + "," +
                 format_double(cfg.bike_speed_mps) + ",bike\n";
  }

  std::set<std::pair<std::string, std::string>> tunnel_pairs = {};

  void tunnel_pair(const std::string& a, const std::string& b, double ax, double ay, double bx,
                   double by) {
    if (a == b) return;  // anchors snapped onto the same grid node
    if (!tunnel_pairs.insert(std::minmax(a, b)).second) return;
    double len = std::hypot(bx - ax, by - ay);
    links_csv += "t_" + a + "__" + b + "," + a + "," + b + "," + format_double(len) + "," +
                 format_double(cfg.tunnel_speed_mps) + ",tunnel\n";
    links_csv += "t_" + b + "__" + a + "," + b + "," + a + "," + format_double(len) + "," +
                 format_double(cfg.tunnel_speed_mps) + ",tunnel\n";
  }
};

}  // namespace

City build_city(const CityConfig& cfg) {
  if (cfg.grid_nx < 5 || cfg.grid_ny < 5)
    throw std::invalid_argument("build_city: grid must be at least 5x5");
  if (cfg.carrier_count < 1 || cfg.carrier_count > 7)
    throw std::invalid_argument("build_city: carrier_count must be in 1..7");
  if (cfg.hub_connected_count > cfg.carrier_count)
    throw std::invalid_argument("build_city: more connected carriers than carriers");

  Builder b{cfg};

  for (int col = 0; col < cfg.grid_nx; ++col)
    for (int row = 0; row < cfg.grid_ny; ++row)
      b.nodes_csv += b.node_id(col, row) + "," + format_double(b.x_of(col)) + "," +
                     format_double(b.y_of(row)) + "\n";

  for (int col = 0; col < cfg.grid_nx; ++col)
    for (int row = 0; row < cfg.grid_ny; ++row) {
      if (col + 1 < cfg.grid_nx) {
        b.road_link(b.node_id(col, row), b.node_id(col + 1, row), b.x_of(col), b.y_of(row),
                    b.x_of(col + 1), b.y_of(row));
        b.road_link(b.node_id(col + 1, row), b.node_id(col, row), b.x_of(col + 1), b.y_of(row),
                    b.x_of(col), b.y_of(row));
      }
      if (row + 1 < cfg.grid_ny) {
        b.road_link(b.node_id(col, row), b.node_id(col, row + 1), b.x_of(col), b.y_of(row),
                    b.x_of(col), b.y_of(row + 1));
        b.road_link(b.node_id(col, row + 1), b.node_id(col, row), b.x_of(col), b.y_of(row + 1),
                    b.x_of(col), b.y_of(row));
      }
    }

  // Inner-city bike grid.
  int cc = (cfg.grid_nx - 1) / 2, cr = (cfg.grid_ny - 1) / 2;
  auto in_bike = [&](int col, int row) {
    return std::abs(col - cc) <= cfg.bike_halfwidth && std::abs(row - cr) <= cfg.bike_halfwidth;
  };
  for (int col = 0; col < cfg.grid_nx; ++col)
    for (int row = 0; row < cfg.grid_ny; ++row) {
      if (!in_bike(col, row)) continue;
      if (col + 1 < cfg.grid_nx && in_bike(col + 1, row)) {
        b.bike_link(b.node_id(col, row), b.node_id(col + 1, row), cfg.spacing_m);
        b.bike_link(b.node_id(col + 1, row), b.node_id(col, row), cfg.spacing_m);
      }
      if (row + 1 < cfg.grid_ny && in_bike(col, row + 1)) {
        b.bike_link(b.node_id(col, row), b.node_id(col, row + 1), cfg.spacing_m);
        b.bike_link(b.node_id(col, row + 1), b.node_id(col, row), cfg.spacing_m);
      }
    }

  // Micro-hubs, border portals, and the tunnel loop with spurs.
  struct Anchor {
    std::string node;
    double x, y;
  };
  auto anchor = [&](double fx, double fy) {
    int col = b.snap_col(fx), row = b.snap_row(fy);
    return Anchor{b.node_id(col, row), b.x_of(col), b.y_of(row)};
  };

  Anchor h_sw = anchor(0.33, 0.33), h_nw = anchor(0.33, 0.67), h_se = anchor(0.67, 0.33),
         h_ne = anchor(0.67, 0.67), h_c = anchor(0.50, 0.50);
  Anchor p_w = anchor(0.0, 0.5), p_s = anchor(0.5, 0.0), p_e = anchor(1.0, 0.5),
         p_n = anchor(0.5, 1.0);

  auto tun = [&](const Anchor& a, const Anchor& c) { b.tunnel_pair(a.node, c.node, a.x, a.y, c.x, c.y); };
  tun(h_sw, h_se);
  tun(h_se, h_ne);
  tun(h_ne, h_nw);
  tun(h_nw, h_sw);
  tun(h_sw, h_c);
  tun(h_c, h_ne);
  tun(p_w, h_sw);
  tun(p_w, h_nw);
  tun(p_s, h_sw);
  tun(p_s, h_se);
  tun(p_e, h_se);
  tun(p_e, h_ne);
  tun(p_n, h_nw);
  tun(p_n, h_ne);

  demand::DemandConfig dc;
  dc.total_parcels = cfg.total_parcels;
  dc.parcel_size_min = cfg.parcel_size_min;
  dc.parcel_size_max = cfg.parcel_size_max;

  std::vector<Anchor> hub_anchors{h_sw, h_nw, h_se, h_ne, h_c};
  const char* hub_names[] = {"hub_sw", "hub_nw", "hub_se", "hub_ne", "hub_c"};
  for (int i = 0; i < 5; ++i)
    dc.hubs.push_back({hub_names[i], hub_anchors[i].node, cfg.hub_daily_capacity});

  dc.portal_nodes = {p_w.node, p_s.node, p_e.node, p_n.node};

  // Facilities: connected ones get a tunnel spur to the nearest hub anchor
  // and, for industry, to the nearest portal.
  for (const auto& spec : cfg.facilities) {
    Anchor fa = anchor(spec.fx, spec.fy);
    dc.facilities.push_back({spec.id, fa.node, spec.kind, spec.daily_supply});
    if (!spec.tunnel) continue;
    const Anchor* best = nullptr;
    double best_d = 0;
    for (const auto& h : hub_anchors) {
      double d = std::hypot(h.x - fa.x, h.y - fa.y);
      if (!best || d < best_d) {
        best = &h;
        best_d = d;
      }
    }
    tun(fa, *best);
    if (spec.kind == demand::FacilityKind::industry) {
      const Anchor portals[] = {p_w, p_s, p_e, p_n};
      const Anchor* portal = &portals[0];
      for (const auto& p : portals)
        if (std::hypot(p.x - fa.x, p.y - fa.y) < std::hypot(portal->x - fa.x, portal->y - fa.y))
          portal = &p;
      tun(fa, *portal);
    }
  }

  // Carrier depots around the boundary; the first hub_connected_count are
  // inside the shuttle's feeding area.
  const double depot_frac[7][2] = {{0.0, 0.35}, {0.0, 0.75}, {0.30, 1.0}, {0.75, 1.0},
                                   {1.0, 0.65}, {1.0, 0.20}, {0.40, 0.0}};
  for (int i = 0; i < cfg.carrier_count; ++i) {
    demand::Carrier c;
    c.id = "carrier_" + std::to_string(i + 1);
    c.depot_node_id = b.snap(depot_frac[i][0], depot_frac[i][1]);
    c.market_share = 1.0 / cfg.carrier_count;
    c.hub_connected = i < cfg.hub_connected_count;
    dc.carriers.push_back(std::move(c));
  }
  dc.carriers.back().market_share =
      1.0 - (cfg.carrier_count - 1) * (1.0 / cfg.carrier_count);

  // Freight terminal in the far corner feeds the facilities.
  dc.supply_origin_node = b.snap(1.0, 1.0);

  // One zone per grid node, weight from the radial kernel.
  double cx = b.x_of(cc), cy = b.y_of(cr);
  for (int col = 0; col < cfg.grid_nx; ++col)
    for (int row = 0; row < cfg.grid_ny; ++row) {
      double d2 = std::pow(b.x_of(col) - cx, 2) + std::pow(b.y_of(row) - cy, 2);
      demand::Zone z;
      z.id = "z_" + pad2(col) + "_" + pad2(row);
      z.centroid_node_id = b.node_id(col, row);
      z.weight = std::exp(-d2 / (2 * cfg.demand_sigma_m * cfg.demand_sigma_m));
      dc.zones.push_back(std::move(z));
    }

  City city;
  city.network = net::Network::from_csv_text(b.nodes_csv, b.links_csv, b.profiles_csv);
  city.demand_config = std::move(dc);
  return city;
}

}  // namespace subterra::citygen
