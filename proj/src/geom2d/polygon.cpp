#include <algorithm>
#include <cassert>
#include <limits>
#include <stdexcept>

#include "setloc/errors.hpp"
#include "setloc/geom2d.hpp"

namespace setloc::geom {

namespace {

// Vertices closer than this to the chord of their neighbours are dropped.
// Far below kEps, so the clean-up never moves the boundary by a visible
// amount.
constexpr double kCollinearRel = 1e-13;

// Maximum angular step of the arc polylines built by sector_outer_polygon.
constexpr double kSectorStep = 3.0 * kPi / 180.0;
constexpr int kMaxSectorSteps = 24;

double orient(Point2 o, Point2 a, Point2 b) { return cross(a - o, b - o); }

struct HalfPlane {
  Point2 normal;  // unit outward normal
  double offset;  // the set is {p : normal . p <= offset}
};

std::vector<Point2> monotone_chain(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2& p = pts[i];
    while (k >= lower && orient(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

void drop_near_collinear(std::vector<Point2>& ring) {
  double scale = 1.0;
  for (const Point2& p : ring) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  const double tol = kCollinearRel * scale;
  bool changed = true;
  while (changed && ring.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < ring.size() && ring.size() >= 3; ++i) {
      const Point2 prev = ring[(i + ring.size() - 1) % ring.size()];
      const Point2 next = ring[(i + 1) % ring.size()];
      const double chord = norm(next - prev);
      if (chord == 0.0 || orient(prev, ring[i], next) <= tol * chord) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      }
    }
  }
}

std::vector<HalfPlane> half_planes(const ConvexPolygon& p) {
  std::vector<HalfPlane> planes;
  const auto v = p.vertices();
  if (p.is_point()) {
    planes.push_back({{1.0, 0.0}, v[0].x});
    planes.push_back({{-1.0, 0.0}, -v[0].x});
    planes.push_back({{0.0, 1.0}, v[0].y});
    planes.push_back({{0.0, -1.0}, -v[0].y});
    return planes;
  }
  if (p.is_segment()) {
    const Point2 d = v[1] - v[0];
    const Point2 u = (1.0 / norm(d)) * d;
    const Point2 n{-u.y, u.x};
    planes.push_back({n, dot(n, v[0])});
    planes.push_back({-n, -dot(n, v[0])});
    planes.push_back({u, dot(u, v[1])});
    planes.push_back({-u, -dot(u, v[0])});
    return planes;
  }
  planes.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 e = v[(i + 1) % v.size()] - v[i];
    const Point2 n = (1.0 / norm(e)) * Point2{e.y, -e.x};
    planes.push_back({n, dot(n, v[i])});
  }
  return planes;
}

std::vector<Point2> clip(const std::vector<Point2>& ring, const HalfPlane& h, double slack) {
  std::vector<Point2> out;
  if (ring.empty()) return out;
  out.reserve(ring.size() + 1);
  const double c = h.offset + slack;
  Point2 prev = ring.back();
  double dp = dot(h.normal, prev) - c;
  for (const Point2& cur : ring) {
    const double dc = dot(h.normal, cur) - c;
    if (dc <= 0.0) {
      if (dp > 0.0) out.push_back(prev + (dp / (dp - dc)) * (cur - prev));
      out.push_back(cur);
    } else if (dp <= 0.0 && ring.size() > 1) {
      out.push_back(prev + (dp / (dp - dc)) * (cur - prev));
    }
    prev = cur;
    dp = dc;
  }
  return out;
}

double edge_collapse_gain(std::span<const Point2> v, std::size_t i, Point2* apex) {
  // Removes edge (v[i], v[i+1]) by extending edges (v[i-1], v[i]) and
  // (v[i+1], v[i+2]) to their meeting point.
  const std::size_t n = v.size();
  const Point2 a0 = v[(i + n - 1) % n];
  const Point2 a1 = v[i];
  const Point2 b0 = v[(i + 1) % n];
  const Point2 b1 = v[(i + 2) % n];
  const Point2 d1 = a1 - a0;
  const Point2 d2 = b1 - b0;
  const double denom = cross(d1, d2);
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  const double t = cross(b0 - a1, d2) / denom;
  if (t < 0.0) return std::numeric_limits<double>::infinity();
  *apex = a1 + t * d1;
  return 0.5 * std::abs(cross(*apex - a1, b0 - a1));
}

}  // namespace

ConvexPolygon normalize_polygon(std::vector<Point2> points, std::size_t v_max) {
  if (points.empty()) throw std::invalid_argument("polygon needs at least one point");
  for (const Point2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("polygon vertex is not finite");
    }
  }
  std::vector<Point2> ring = monotone_chain(std::move(points));
  if (ring.size() >= 3) drop_near_collinear(ring);

  // Collapse slivers and specks to segments and points.
  std::size_t ia = 0;
  std::size_t ib = 0;
  double diameter = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    for (std::size_t j = i + 1; j < ring.size(); ++j) {
      const double d = norm(ring[j] - ring[i]);
      if (d > diameter) {
        diameter = d;
        ia = i;
        ib = j;
      }
    }
  }
  if (diameter <= kEps) return ConvexPolygon({ring[0]});
  if (ring.size() >= 3) {
    const Point2 a = ring[ia];
    const Point2 u = (1.0 / diameter) * (ring[ib] - a);
    double width = 0.0;
    for (const Point2& p : ring) width = std::max(width, std::abs(cross(u, p - a)));
    if (width <= kEps) ring = {ring[ia], ring[ib]};
  }
  if (ring.size() == 2) {
    if (ring[1].x < ring[0].x || (ring[1].x == ring[0].x && ring[1].y < ring[0].y)) {
      std::swap(ring[0], ring[1]);
    }
    return ConvexPolygon(std::move(ring));
  }
  ConvexPolygon poly(std::move(ring));
  if (poly.size() > v_max) return simplify_outer(poly, v_max);
  return poly;
}

ConvexPolygon ConvexPolygon::hull_of(std::span<const Point2> points) {
  return normalize_polygon(std::vector<Point2>(points.begin(), points.end()));
}

ConvexPolygon ConvexPolygon::point(Point2 p) { return normalize_polygon({p}); }

ConvexPolygon ConvexPolygon::box(Interval x, Interval y) {
  return normalize_polygon({{x.lo, y.lo}, {x.hi, y.lo}, {x.hi, y.hi}, {x.lo, y.hi}});
}

ConvexPolygon ConvexPolygon::square(Point2 c, double area) {
  const double h = 0.5 * std::sqrt(std::max(area, 0.0));
  return box({c.x - h, c.x + h}, {c.y - h, c.y + h});
}

double ConvexPolygon::area() const {
  if (vertices_.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    twice += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * twice;
}

Point2 ConvexPolygon::centroid() const {
  const double a = area();
  if (vertices_.size() < 3 || a <= 0.0) {
    Point2 s;
    for (const Point2& p : vertices_) s = s + p;
    return (1.0 / static_cast<double>(vertices_.size())) * s;
  }
  // Shift to the first vertex for accuracy far from the origin.
  const Point2 o = vertices_[0];
  Point2 c;
  for (std::size_t i = 1; i + 1 < vertices_.size(); ++i) {
    const Point2 p = vertices_[i] - o;
    const Point2 q = vertices_[i + 1] - o;
    const double w = cross(p, q);
    c = c + (w / 3.0) * (p + q);
  }
  return o + (0.5 / a) * c;
}

bool ConvexPolygon::contains(Point2 q, double tol) const {
  if (is_point()) return norm(q - vertices_[0]) <= tol;
  if (is_segment()) {
    const Point2 d = vertices_[1] - vertices_[0];
    const double t = std::clamp(dot(q - vertices_[0], d) / dot(d, d), 0.0, 1.0);
    return norm(q - (vertices_[0] + t * d)) <= tol;
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point2 a = vertices_[i];
    const Point2 e = vertices_[(i + 1) % vertices_.size()] - a;
    if (cross(e, q - a) < -tol * norm(e)) return false;
  }
  return true;
}

Interval ConvexPolygon::x_range() const {
  auto [lo, hi] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                      [](Point2 a, Point2 b) { return a.x < b.x; });
  return {lo->x, hi->x};
}

Interval ConvexPolygon::y_range() const {
  auto [lo, hi] = std::minmax_element(vertices_.begin(), vertices_.end(),
                                      [](Point2 a, Point2 b) { return a.y < b.y; });
  return {lo->y, hi->y};
}

ConvexPolygon ConvexPolygon::translated(Point2 offset) const {
  std::vector<Point2> v(vertices_);
  for (Point2& p : v) p = p + offset;
  return normalize_polygon(std::move(v));
}

ConvexPolygon ConvexPolygon::negated() const {
  std::vector<Point2> v(vertices_);
  for (Point2& p : v) p = -p;
  return normalize_polygon(std::move(v));
}

ConvexPolygon minkowski_sum(const ConvexPolygon& a, const ConvexPolygon& b) {
  std::vector<Point2> sums;
  sums.reserve(a.size() * b.size());
  for (const Point2& p : a.vertices()) {
    for (const Point2& q : b.vertices()) sums.push_back(p + q);
  }
  return normalize_polygon(std::move(sums));
}

std::optional<ConvexPolygon> intersect(const ConvexPolygon& a, const ConvexPolygon& b) {
  const Interval ax = a.x_range(), ay = a.y_range();
  const Interval bx = b.x_range(), by = b.y_range();
  if (ax.lo > bx.hi + kEps || bx.lo > ax.hi + kEps || ay.lo > by.hi + kEps ||
      by.lo > ay.hi + kEps) {
    return std::nullopt;
  }
  // Clip the lower-dimensional set so points and segments stay degenerate.
  const bool swap = b.size() < 3 && b.size() < a.size();
  const ConvexPolygon& subject = swap ? b : a;
  const ConvexPolygon& clipper = swap ? a : b;
  std::vector<Point2> ring(subject.vertices().begin(), subject.vertices().end());
  for (const HalfPlane& h : half_planes(clipper)) {
    ring = clip(ring, h, kEps);
    if (ring.empty()) return std::nullopt;
  }
  return normalize_polygon(std::move(ring));
}

ConvexPolygon convex_hull(std::span<const ConvexPolygon> sets) {
  if (sets.empty()) throw std::invalid_argument("convex_hull of no sets");
  std::vector<Point2> pts;
  for (const ConvexPolygon& s : sets) pts.insert(pts.end(), s.vertices().begin(), s.vertices().end());
  return normalize_polygon(std::move(pts));
}

std::optional<ConvexPolygon> clip_to_annulus(const ConvexPolygon& q, const ConvexPolygon& centers, Interval range) {
  if (!(range.lo <= range.hi) || range.hi < 0.0) throw std::invalid_argument("bad annulus range");
  const auto cv = centers.vertices();

  // Outer bound: supporting lines of centers + disk(hi), at directions that
  // span q as seen from the centers. Any direction gives a valid superset.
  const AngleInterval span = angular_hull(minkowski_sum(q, centers.negated()));
  std::vector<Point2> ring(q.vertices().begin(), q.vertices().end());
  const int lines = span.is_full() ? 16 : 9;
  for (int i = 0; i < lines; ++i) {
    const double t = span.is_full() ? kTwoPi * i / lines
                                    : span.lo() + span.width() * i / (lines - 1);
    const Point2 u = polar(1.0, t);
    double support = -std::numeric_limits<double>::infinity();
    for (const Point2& c : cv) support = std::max(support, dot(u, c));
    ring = clip(ring, {u, support + range.hi}, kEps);
    if (ring.empty()) return std::nullopt;
  }
  const ConvexPolygon outer = normalize_polygon(ring);
  if (range.lo <= 0.0) return outer;

  // Inner bound: points closer than lo to every center lie within lo of every
  // vertex. Keep the boundary of outer outside that hole; the hole is convex,
  // so these points span the hull of what remains. The radius is shrunk a
  // little so rounding never removes a feasible point.
  const double hole = range.lo - kEps * std::max(1.0, range.lo);
  if (hole <= 0.0) return outer;
  const auto ov = outer.vertices();
  std::vector<Point2> kept;
  if (ov.size() == 1) {
    const bool inside = std::all_of(cv.begin(), cv.end(), [&](Point2 c) { return norm(ov[0] - c) < hole; });
    if (inside) return std::nullopt;
    return outer;
  }
  for (std::size_t i = 0; i < ov.size(); ++i) {
    const Point2 p0 = ov[i];
    const Point2 p1 = ov[(i + 1) % ov.size()];
    const Point2 e = p1 - p0;
    // Line parameters inside the hole, not clamped to the edge, so that an
    // endpoint sitting on the hole boundary is classified the same way from
    // both of its edges up to rounding, and kept when in doubt.
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    const double a = dot(e, e);
    for (const Point2& c : cv) {
      const Point2 d = p0 - c;
      const double b = 2.0 * dot(e, d);
      const double disc = b * b - 4.0 * a * (dot(d, d) - hole * hole);
      if (disc < 0.0) {
        t0 = 1.0;
        t1 = 0.0;
        break;
      }
      const double sq = std::sqrt(disc);
      t0 = std::max(t0, (-b - sq) / (2.0 * a));
      t1 = std::min(t1, (-b + sq) / (2.0 * a));
    }
    if (t0 > t1 || t1 <= 0.0 || t0 >= 1.0) {
      kept.push_back(p0);
      kept.push_back(p1);
      continue;
    }
    if (t0 > 0.0) {
      kept.push_back(p0);
      kept.push_back(p0 + t0 * e);
    }
    if (t1 < 1.0) {
      kept.push_back(p0 + t1 * e);
      kept.push_back(p1);
    }
  }
  if (kept.empty()) return std::nullopt;
  return normalize_polygon(std::move(kept));
}

ConvexPolygon ball_outer_polygon(double radius, Norm norm_kind, int k) {
  if (!(radius >= 0.0)) throw std::invalid_argument("ball radius must be >= 0");
  if (radius == 0.0) return ConvexPolygon::point({0.0, 0.0});
  if (norm_kind == Norm::LInf) return ConvexPolygon::box({-radius, radius}, {-radius, radius});
  if (k < 4 || static_cast<std::size_t>(k) > kMaxVertices) {
    throw std::invalid_argument("l2 ball polygon needs 4 <= k <= 32 vertices");
  }
  const double circum = radius / std::cos(kPi / k);
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) v.push_back(polar(circum, kPi / k + kTwoPi * i / k));
  return normalize_polygon(std::move(v));
}

AngleInterval angular_hull(const ConvexPolygon& p) {
  if (p.contains({0.0, 0.0})) return AngleInterval::full();
  const Point2 c = p.centroid();
  const double ref = std::atan2(c.y, c.x);
  double lo = 0.0;
  double hi = 0.0;
  for (const Point2& v : p.vertices()) {
    const double rel = wrap_angle(std::atan2(v.y, v.x) - ref);
    lo = std::min(lo, rel);
    hi = std::max(hi, rel);
  }
  if (hi - lo >= kPi) return AngleInterval::full();
  return AngleInterval::from_bounds(ref + lo, ref + hi);
}

ConvexPolygon sector_outer_polygon(const AngleInterval& angle, Interval range) {
  if (angle.half_width() >= 0.5 * kPi) throw SectorTooWide(angle.half_width());
  if (range.lo < 0.0 || range.hi < range.lo) {
    throw std::invalid_argument("sector range must satisfy 0 <= lo <= hi");
  }
  const double span = angle.width();
  const int steps = span > 0.0
                        ? std::clamp(static_cast<int>(std::ceil(span / kSectorStep)), 1, kMaxSectorSteps)
                        : 1;
  const double step = span / steps;
  const double outer = range.hi / std::cos(0.5 * step);
  const double first = angle.lo();
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(steps) + 3);
  v.push_back(polar(range.lo, first));
  v.push_back(polar(range.lo, angle.hi()));
  for (int i = 0; i <= steps; ++i) v.push_back(polar(outer, first + step * i));
  return normalize_polygon(std::move(v));
}

ConvexPolygon simplify_outer(const ConvexPolygon& p, std::size_t v_max) {
  if (v_max < 4) throw std::invalid_argument("simplify_outer needs v_max >= 4");
  if (p.size() <= v_max) return p;
  std::vector<Point2> v(p.vertices().begin(), p.vertices().end());
  while (v.size() > v_max) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    Point2 best_apex;
    for (std::size_t i = 0; i < v.size(); ++i) {
      Point2 apex;
      const double gain = edge_collapse_gain(v, i, &apex);
      if (gain < best) {
        best = gain;
        best_i = i;
        best_apex = apex;
      }
    }
    assert(std::isfinite(best));
    const std::size_t j = (best_i + 1) % v.size();
    v[best_i] = best_apex;
    v.erase(v.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return normalize_polygon(std::move(v), v.size());
}

}  // namespace setloc::geom
