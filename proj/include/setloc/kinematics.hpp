#pragma once

#include <vector>

#include "setloc/geom2d.hpp"

namespace setloc::kin {

using geom::AngleInterval;
using geom::Interval;
using geom::Point2;

struct RobotModel {
  double wheelbase = 2.1;    // m
  double dt = 0.5;           // s
  double body_length = 4.0;  // m
  double body_width = 1.8;   // m
  double eps_v = 0.0;        // m/s, bound on velocity noise
  double eps_delta = 0.0;    // rad, bound on steering noise
  double eps_f = 0.0;        // m, infinity-norm bound on marker disturbance
};

/// Marker position in polar coordinates around the rear-axle centre, in the
/// robot frame.
struct MarkerOffset {
  double delta_l = 0.0;
  double delta_theta = 0.0;
};

struct RobotPose {
  double x = 0.0;  // rear-axle centre
  double y = 0.0;
  double theta = 0.0;
};

struct Control {
  double v = 0.0;      // m/s
  double delta = 0.0;  // rad, steering angle
};

/// One discrete bicycle-model step with the noisy inputs applied.
RobotPose bicycle_step(const RobotPose& pose, const Control& u, double w_v, double w_delta,
                       const RobotModel& model);

struct MarkerDisplacement {
  double distance = 0.0;   // signed; negative when reversing
  double direction = 0.0;  // rad
};

/// Closed-form marker displacement over one step for the already-noisy
/// control.
MarkerDisplacement marker_displacement(const Control& noisy, double heading,
                                       const MarkerOffset& offset, const RobotModel& model);

struct MarkerNoise {
  double w_v = 0.0;
  double w_delta = 0.0;
  Point2 w_f;
};

Point2 marker_step(Point2 p, const Control& u, const MarkerNoise& noise, double heading,
                   const MarkerOffset& offset, const RobotModel& model);

struct DisplacementBox {
  Interval dx;
  Interval dy;
};

/// Intervals containing every marker displacement for |v - u.v| <= eps_v,
/// |delta - u.delta| <= eps_delta and heading in heading_set.
DisplacementBox displacement_bounds(const Control& u, const AngleInterval& heading_set,
                                    const MarkerOffset& offset, const RobotModel& model);

/// Rigid placement of a marker for a given pose.
Point2 marker_position(const RobotPose& pose, const MarkerOffset& offset);

/// Offsets of the four body-rectangle corners, counter-clockwise from
/// rear-right. The rear axle sits rear_overhang ahead of the rear edge.
std::vector<MarkerOffset> corner_marker_offsets(const RobotModel& model, double rear_overhang);

/// Body rectangle corners for a pose (same order as corner_marker_offsets).
std::vector<Point2> body_corners(const RobotPose& pose, const RobotModel& model,
                                 double rear_overhang);

/// Upper bound on the distance between a rigidly re-placed marker and its
/// one-step closed-form prediction, for marker distance delta_l from the rear
/// axle and |yaw increment| <= yaw.
double discretization_gap(double delta_l, double yaw);

/// Largest yaw increment one step can produce for control u under the model's
/// noise bounds.
double max_yaw_increment(const Control& u, const RobotModel& model);

/// Range of the heading change over all in-bound speed and steering noise.
Interval yaw_increment_bounds(const Control& u, const RobotModel& model);

}  // namespace setloc::kin
