#pragma once

// Test helpers: build travel-time matrices straight from planar points so
// solver tests need no Network.

#include <cmath>
#include <string>
#include <vector>

#include "subterra/vrp.hpp"

namespace testutil {

struct Point {
  std::string id;
  double x;
  double y;
};

inline subterra::net::TravelTimeMatrix euclidean_matrix(const std::vector<Point>& pts,
                                                        double speed_mps) {
  subterra::net::TravelTimeMatrix m;
  std::size_t n = pts.size();
  for (const auto& p : pts) m.locations.push_back(p.id);
  m.seconds.assign(n * n, 0);
  m.meters.assign(n * n, 0);
  m.reachable.assign(n * n, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double d = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
      m.meters[m.at(i, j)] = d;
      m.seconds[m.at(i, j)] = d / speed_mps;
    }
  return m;
}

}  // namespace testutil
