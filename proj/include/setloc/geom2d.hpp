#pragma once

// Sound 2D convex-set algebra. Every operation that approximates returns a
// superset of the exact result, so containment of a true state survives any
// composition of these operations.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace setloc::geom {

/// Tolerance for emptiness, collinearity and membership predicates (meters,
/// and radians for angular predicates).
inline constexpr double kEps = 1e-9;

/// Vertex budget of every polygon produced by this module.
inline constexpr std::size_t kMaxVertices = 32;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline Point2 polar(double radius, double angle) {
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v, double tol = kEps) const { return v >= lo - tol && v <= hi + tol; }
};

// ---------------------------------------------------------------------------
// Angles

/// Wraps to (-pi, pi].
double wrap_angle(double a);

/// Closed arc on the circle. A half-width of pi is the full circle.
class AngleInterval {
 public:
  AngleInterval() = default;
  AngleInterval(double center, double half_width);

  static AngleInterval point(double angle) { return {angle, 0.0}; }
  static AngleInterval full() { return {0.0, kPi}; }
  /// Arc from lo counter-clockwise to hi (hi >= lo, unwrapped).
  static AngleInterval from_bounds(double lo, double hi);

  double center() const { return center_; }
  double half_width() const { return half_width_; }
  double width() const { return 2.0 * half_width_; }
  double lo() const { return center_ - half_width_; }
  double hi() const { return center_ + half_width_; }
  bool is_full() const { return half_width_ >= kPi; }

  bool contains(double angle, double tol = kEps) const;
  AngleInterval shifted(double delta) const { return {center_ + delta, half_width_}; }
  AngleInterval widened(double delta) const { return {center_, half_width_ + delta}; }

 private:
  double center_ = 0.0;
  double half_width_ = 0.0;
};

struct AngleIntersection {
  std::optional<AngleInterval> arc;  // empty when the arcs are disjoint
  bool disconnected = false;         // exact intersection was two arcs
};

/// Smallest arc covering a ∩ b.
AngleIntersection intersect_angles(const AngleInterval& a, const AngleInterval& b);

/// Smallest arc covering the union of the inputs. Requires a non-empty list.
AngleInterval enclose_angles(std::span<const AngleInterval> arcs);

// ---------------------------------------------------------------------------
// Polygons

/// Bounded convex region in vertex form, counter-clockwise, no collinear
/// vertices. One vertex is a point, two vertices a segment.
class ConvexPolygon {
 public:
  /// Convex hull of the given points. Requires at least one point.
  static ConvexPolygon hull_of(std::span<const Point2> points);
  static ConvexPolygon point(Point2 p);
  static ConvexPolygon box(Interval x, Interval y);
  /// Axis-aligned square of the given area centred at c.
  static ConvexPolygon square(Point2 c, double area);

  std::span<const Point2> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool is_point() const { return vertices_.size() == 1; }
  bool is_segment() const { return vertices_.size() == 2; }
  Point2 operator[](std::size_t i) const { return vertices_[i]; }

  double area() const;
  Point2 centroid() const;
  bool contains(Point2 q, double tol = kEps) const;
  /// Axis-aligned bounds.
  Interval x_range() const;
  Interval y_range() const;

  ConvexPolygon translated(Point2 offset) const;
  /// Point reflection through the origin.
  ConvexPolygon negated() const;

 private:
  explicit ConvexPolygon(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {}
  friend ConvexPolygon normalize_polygon(std::vector<Point2> points, std::size_t v_max);

  std::vector<Point2> vertices_;
};

/// Hull of the points, capped at v_max vertices by outer simplification.
ConvexPolygon normalize_polygon(std::vector<Point2> points, std::size_t v_max = kMaxVertices);

ConvexPolygon minkowski_sum(const ConvexPolygon& a, const ConvexPolygon& b);

/// Exact intersection up to kEps; std::nullopt when the sets are disjoint.
std::optional<ConvexPolygon> intersect(const ConvexPolygon& a, const ConvexPolygon& b);

/// Hull of a non-empty list of sets.
ConvexPolygon convex_hull(std::span<const ConvexPolygon> sets);

/// Superset of {s in q : |s - c| in range for some c in centers}, tight up
/// to the outer arc's tangent spacing. nullopt when provably empty.
std::optional<ConvexPolygon> clip_to_annulus(const ConvexPolygon& q, const ConvexPolygon& centers, Interval range);

enum class Norm { L2, LInf };

/// Ball around the origin. L2 balls are circumscribed regular k-gons
/// (apothem = radius), so they contain the disk.
ConvexPolygon ball_outer_polygon(double radius, Norm norm, int k = 16);

/// Smallest arc containing the directions atan2(q) of all q in p; the full
/// circle when p contains the origin.
AngleInterval angular_hull(const ConvexPolygon& p);

/// Outer polygon of the circular (range.lo == 0) or annular sector
/// {r (cos t, sin t) : t in angle, r in range}. Throws SectorTooWide when
/// angle.half_width() >= pi/2.
ConvexPolygon sector_outer_polygon(const AngleInterval& angle, Interval range);

/// Superset of p with at most v_max vertices (v_max >= 4). Repeatedly drops
/// the edge whose removal, by extending its neighbours, adds the least area.
ConvexPolygon simplify_outer(const ConvexPolygon& p, std::size_t v_max);

inline double area(const ConvexPolygon& p) { return p.area(); }
inline bool contains(const ConvexPolygon& p, Point2 q, double tol = kEps) {
  return p.contains(q, tol);
}

}  // namespace setloc::geom
