#include "setloc/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace setloc::sense {

using geom::AngleInterval;
using geom::Interval;

std::optional<Measurement> measure(const SensorPose& sensor, const SensorModel& model, Point2 marker,
                                   double w_a, double w_r) {
  const Point2 d = marker - sensor.xy;
  const double range = geom::norm(d);
  const double bearing = geom::wrap_angle(std::atan2(d.y, d.x) - sensor.theta);
  if (range > model.max_range) return std::nullopt;
  if (model.fov < geom::kTwoPi && std::abs(bearing) > 0.5 * model.fov) return std::nullopt;

  Measurement m;
  m.alpha = geom::wrap_angle(bearing + w_a);
  if (model.kind == SensorKind::AngleRange) m.r = range + w_r;
  return m;
}

ConvexPolygon feasible_marker_region(double alpha, std::optional<double> r, const SensorModel& model,
                                     double theta_c, double d_theta_c) {
  if (!(d_theta_c >= 0.0)) throw std::invalid_argument("heading half-width must be >= 0");
  const AngleInterval bearing(alpha + theta_c, model.eps_wa + d_theta_c);
  Interval range{0.0, model.max_range};
  if (model.kind == SensorKind::AngleRange) {
    if (!r) throw std::invalid_argument("angle+range sensor measurement without a range");
    range = {std::max(0.0, *r - model.eps_wr), std::max(0.0, *r + model.eps_wr)};
  }
  return geom::sector_outer_polygon(bearing, range);
}

ConvexPolygon feasible_sensor_region(double alpha, std::optional<double> r, const SensorModel& model,
                                     double theta_c, double d_theta_c) {
  return feasible_marker_region(alpha, r, model, theta_c, d_theta_c).negated();
}

}  // namespace setloc::sense
