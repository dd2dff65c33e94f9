#include "setloc/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace setloc::kin {

using geom::kPi;
using geom::polar;
using geom::wrap_angle;

namespace {

// Rotation step used when sweeping a heading set.
constexpr double kHeadingStep = 2.0 * kPi / 180.0;

Point2 rotate(Point2 p, double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

}  // namespace

RobotPose bicycle_step(const RobotPose& pose, const Control& u, double w_v, double w_delta,
                       const RobotModel& model) {
  const double s = (u.v + w_v) * model.dt;
  const double delta = u.delta + w_delta;
  return {pose.x + s * std::cos(pose.theta) * std::cos(delta),
          pose.y + s * std::sin(pose.theta) * std::cos(delta),
          wrap_angle(pose.theta + s / model.wheelbase * std::sin(delta))};
}

MarkerDisplacement marker_displacement(const Control& noisy, double heading,
                                       const MarkerOffset& offset, const RobotModel& model) {
  const double l = model.wheelbase;
  const double dl = offset.delta_l;
  const double dth = offset.delta_theta;
  const double sd = std::sin(noisy.delta);
  const double cd = std::cos(noisy.delta);
  const double ratio = dl * sd / l;
  const double radicand =
      ratio * ratio + cd * cd - dl / l * std::sin(dth) * std::sin(2.0 * noisy.delta);
  const double distance = noisy.v * model.dt * std::sqrt(std::max(radicand, 0.0));
  const double direction =
      heading + dth + std::atan2(dl * std::tan(noisy.delta) - l * std::sin(dth), l * std::cos(dth));
  return {distance, wrap_angle(direction)};
}

Point2 marker_step(Point2 p, const Control& u, const MarkerNoise& noise, double heading,
                   const MarkerOffset& offset, const RobotModel& model) {
  const MarkerDisplacement d =
      marker_displacement({u.v + noise.w_v, u.delta + noise.w_delta}, heading, offset, model);
  return p + polar(d.distance, d.direction) + noise.w_f;
}

DisplacementBox displacement_bounds(const Control& u, const AngleInterval& heading_set,
                                    const MarkerOffset& offset, const RobotModel& model) {
  if (std::abs(u.delta) + model.eps_delta >= 0.5 * kPi) {
    throw std::invalid_argument("steering interval must stay inside (-pi/2, pi/2)");
  }
  // The displacement is v*dt * R(heading) * w(delta), where w(delta) is a
  // linear image of the unit-circle point (cos delta, sin delta). Bound the
  // steering arc by a polygon, map it, scale it by the speed interval and
  // sweep it through the heading set.
  const geom::ConvexPolygon arc =
      geom::sector_outer_polygon(AngleInterval(u.delta, model.eps_delta), Interval{1.0, 1.0});
  const double k = offset.delta_l / model.wheelbase;
  const double a = k * std::sin(offset.delta_theta);
  const double b = k * std::cos(offset.delta_theta);
  const double s_lo = (u.v - model.eps_v) * model.dt;
  const double s_hi = (u.v + model.eps_v) * model.dt;

  std::vector<Point2> body;
  body.reserve(2 * arc.size());
  for (const Point2& p : arc.vertices()) {
    const Point2 w{p.x - a * p.y, b * p.y};
    body.push_back(s_lo * w);
    if (s_hi != s_lo) body.push_back(s_hi * w);
  }

  const double span = heading_set.width();
  const int steps = span > 0.0 ? static_cast<int>(std::ceil(span / kHeadingStep)) : 0;
  const double step = steps > 0 ? span / steps : 0.0;
  const double stretch = steps > 0 ? 1.0 / std::cos(0.5 * step) : 1.0;

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  auto take = [&](Point2 q) {
    x_lo = std::min(x_lo, q.x);
    x_hi = std::max(x_hi, q.x);
    y_lo = std::min(y_lo, q.y);
    y_hi = std::max(y_hi, q.y);
  };
  for (int i = 0; i <= steps; ++i) {
    const double angle = heading_set.lo() + step * i;
    for (const Point2& q : body) {
      const Point2 r = rotate(q, angle);
      take(r);
      if (steps > 0) take(stretch * r);
    }
  }
  return {{x_lo, x_hi}, {y_lo, y_hi}};
}

Point2 marker_position(const RobotPose& pose, const MarkerOffset& offset) {
  return Point2{pose.x, pose.y} + polar(offset.delta_l, pose.theta + offset.delta_theta);
}

std::vector<MarkerOffset> corner_marker_offsets(const RobotModel& model, double rear_overhang) {
  const double rear = -rear_overhang;
  const double front = model.body_length - rear_overhang;
  const double half = 0.5 * model.body_width;
  const Point2 corners[4] = {{rear, -half}, {front, -half}, {front, half}, {rear, half}};
  std::vector<MarkerOffset> offsets;
  for (const Point2& c : corners) offsets.push_back({geom::norm(c), std::atan2(c.y, c.x)});
  return offsets;
}

std::vector<Point2> body_corners(const RobotPose& pose, const RobotModel& model,
                                 double rear_overhang) {
  std::vector<Point2> out;
  for (const MarkerOffset& o : corner_marker_offsets(model, rear_overhang)) {
    out.push_back(marker_position(pose, o));
  }
  return out;
}

double discretization_gap(double delta_l, double yaw) {
  // |e^{i yaw} - 1 - i yaw|, increasing in |yaw|.
  const double y = std::abs(yaw);
  return delta_l * std::hypot(1.0 - std::cos(y), y - std::sin(y));
}

double max_yaw_increment(const Control& u, const RobotModel& model) {
  const double speed = std::abs(u.v) + model.eps_v;
  const double steer = std::min(std::abs(u.delta) + model.eps_delta, 0.5 * kPi);
  return speed * model.dt * std::sin(steer) / model.wheelbase;
}

Interval yaw_increment_bounds(const Control& u, const RobotModel& model) {
  // Yaw is s * sin(delta) / l, monotone in s and in delta on the allowed
  // range, so the extremes sit at the corners of the noise box.
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double wv : {-model.eps_v, model.eps_v}) {
    for (double wd : {-model.eps_delta, model.eps_delta}) {
      const double y = (u.v + wv) * model.dt * std::sin(u.delta + wd) / model.wheelbase;
      out.lo = std::min(out.lo, y);
      out.hi = std::max(out.hi, y);
    }
  }
  return out;
}

}  // namespace setloc::kin
