#pragma once

#include <random>
#include <vector>

#include "setloc/geom2d.hpp"

namespace setloc {

/// Uniform draw from [lo, hi]; returns lo when the interval is degenerate.
template <class Rng>
double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
}

/// Uniform draw from a symmetric bound [-bound, bound].
template <class Rng>
double uniform_symmetric(Rng& rng, double bound) {
  return uniform(rng, -bound, bound);
}

/// Uniform point in a convex polygon (fan triangulation weighted by area).
/// Segments are sampled uniformly along their length.
template <class Rng>
geom::Point2 sample_uniform(const geom::ConvexPolygon& p, Rng& rng) {
  const auto v = p.vertices();
  if (p.is_point()) return v[0];
  if (p.is_segment()) return v[0] + uniform(rng, 0.0, 1.0) * (v[1] - v[0]);
  const double total = p.area();
  double pick = uniform(rng, 0.0, total);
  std::size_t tri = 1;
  for (; tri + 2 < v.size(); ++tri) {
    const double a = 0.5 * geom::cross(v[tri] - v[0], v[tri + 1] - v[0]);
    if (pick <= a) break;
    pick -= a;
  }
  double s = uniform(rng, 0.0, 1.0);
  double t = uniform(rng, 0.0, 1.0);
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  return v[0] + s * (v[tri] - v[0]) + t * (v[tri + 1] - v[0]);
}

template <class Rng>
double sample_uniform(const geom::AngleInterval& arc, Rng& rng) {
  return geom::wrap_angle(arc.center() + uniform_symmetric(rng, arc.half_width()));
}

}  // namespace setloc
