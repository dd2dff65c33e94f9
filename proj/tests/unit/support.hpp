#pragma once

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "setloc/geom2d.hpp"
#include "setloc/sampling.hpp"

namespace testsupport {

using setloc::geom::ConvexPolygon;
using setloc::geom::Point2;

inline double deg(double d) { return d * setloc::geom::kPi / 180.0; }

// Random convex polygon: hull of points scattered on an ellipse-ish blob.
template <class Rng>
ConvexPolygon random_polygon(Rng& rng, int points, Point2 center = {}, double scale = 1.0) {
  std::vector<Point2> pts;
  for (int i = 0; i < points; ++i) {
    const double a = setloc::uniform(rng, -setloc::geom::kPi, setloc::geom::kPi);
    const double r = scale * setloc::uniform(rng, 0.3, 1.0);
    pts.push_back(center + setloc::geom::polar(r, a));
  }
  return ConvexPolygon::hull_of(pts);
}

// Strict convexity, CCW orientation and the vertex cap.
inline bool well_formed(const ConvexPolygon& p) {
  const auto v = p.vertices();
  if (v.empty() || v.size() > setloc::geom::kMaxVertices) return false;
  if (v.size() < 3) return true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i];
    const Point2 b = v[(i + 1) % v.size()];
    const Point2 c = v[(i + 2) % v.size()];
    if (setloc::geom::cross(b - a, c - b) <= 0.0) return false;
  }
  return true;
}

}  // namespace testsupport
