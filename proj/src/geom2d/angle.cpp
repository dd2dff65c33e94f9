#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "setloc/geom2d.hpp"

namespace setloc::geom {

double wrap_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

AngleInterval::AngleInterval(double center, double half_width)
    : center_(wrap_angle(center)), half_width_(std::clamp(half_width, 0.0, kPi)) {
  if (!std::isfinite(center) || !(half_width >= 0.0)) {
    throw std::invalid_argument("angle interval needs a finite center and half_width >= 0");
  }
  if (half_width_ >= kPi) center_ = 0.0;
}

AngleInterval AngleInterval::from_bounds(double lo, double hi) {
  if (hi < lo) hi = lo;
  if (hi - lo >= kTwoPi) return full();
  return {0.5 * (lo + hi), 0.5 * (hi - lo)};
}

bool AngleInterval::contains(double angle, double tol) const {
  if (is_full()) return true;
  return std::abs(wrap_angle(angle - center_)) <= half_width_ + tol;
}

AngleIntersection intersect_angles(const AngleInterval& a, const AngleInterval& b) {
  if (a.is_full()) return {b, false};
  if (b.is_full()) return {a, false};
  // Work in a's frame, where a = [-ha, ha] and b may appear at three
  // windings.
  const double ha = a.half_width();
  const double hb = b.half_width();
  const double d = wrap_angle(b.center() - a.center());
  std::vector<AngleInterval> pieces;
  for (int wind = -1; wind <= 1; ++wind) {
    const double c = d + kTwoPi * wind;
    double lo = std::max(-ha, c - hb);
    double hi = std::min(ha, c + hb);
    if (lo > hi + kEps) continue;
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    pieces.push_back(AngleInterval::from_bounds(a.center() + lo, a.center() + hi));
  }
  if (pieces.empty()) return {std::nullopt, false};
  if (pieces.size() == 1) return {pieces.front(), false};
  const AngleInterval enclosing = enclose_angles(pieces);
  // Two pieces that touch across the seam are one arc.
  const double total = pieces[0].width() + pieces[1].width();
  return {enclosing, enclosing.width() > total + 2.0 * kEps};
}

AngleInterval enclose_angles(std::span<const AngleInterval> arcs) {
  if (arcs.empty()) throw std::invalid_argument("enclose_angles of no arcs");
  struct Span {
    double lo;
    double hi;
  };
  std::vector<Span> spans;
  spans.reserve(arcs.size());
  for (const AngleInterval& arc : arcs) {
    if (arc.is_full()) return AngleInterval::full();
    double lo = wrap_angle(arc.lo());
    if (lo >= kPi) lo -= kTwoPi;  // lo in [-pi, pi)
    spans.push_back({lo, lo + arc.width()});
  }
  std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) { return x.lo < y.lo; });

  std::vector<Span> merged;
  for (const Span& s : spans) {
    if (!merged.empty() && s.lo <= merged.back().hi + kEps) {
      merged.back().hi = std::max(merged.back().hi, s.hi);
    } else {
      merged.push_back(s);
    }
  }
  // Fold spans that reach past the seam into the first one.
  while (merged.size() > 1 && merged.back().hi >= merged.front().lo + kTwoPi - kEps) {
    const Span last = merged.back();
    merged.pop_back();
    merged.front().hi = std::max(merged.front().hi, last.hi - kTwoPi);
    merged.front().lo = last.lo - kTwoPi;
    // Folding can swallow the next spans as well.
    while (merged.size() > 1 && merged[1].lo <= merged.front().hi + kEps) {
      merged.front().hi = std::max(merged.front().hi, merged[1].hi);
      merged.erase(merged.begin() + 1);
    }
  }
  if (merged.size() == 1) {
    const Span s = merged.front();
    if (s.hi - s.lo >= kTwoPi - kEps) return AngleInterval::full();
    return AngleInterval::from_bounds(s.lo, s.hi);
  }
  // The smallest covering arc is the complement of the largest gap.
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const double start = merged[i].hi;
    const double end = i + 1 < merged.size() ? merged[i + 1].lo : merged.front().lo + kTwoPi;
    if (end - start > best_gap) {
      best_gap = end - start;
      best = i;
    }
  }
  const double gap_start = merged[best].hi;
  const double gap_end =
      best + 1 < merged.size() ? merged[best + 1].lo : merged.front().lo + kTwoPi;
  return AngleInterval::from_bounds(gap_end, gap_start + kTwoPi);
}

}  // namespace setloc::geom
