#pragma once

#include <optional>

#include "setloc/geom2d.hpp"

namespace setloc::sense {

using geom::ConvexPolygon;
using geom::Point2;

enum class SensorKind { AngleOnly, AngleRange };

struct SensorModel {
  SensorKind kind = SensorKind::AngleRange;
  double eps_wa = 0.0;     // rad
  double eps_wr = 0.0;     // m, unused for angle-only sensors
  double fov = geom::kTwoPi;
  double max_range = 20.0;  // m
};

struct SensorPose {
  Point2 xy;
  double theta = 0.0;
};

struct Measurement {
  double alpha = 0.0;       // bearing in the sensor frame
  std::optional<double> r;  // absent for angle-only sensors
  int sensor_id = 0;
  int slot = 0;             // position in the sensor's batch
};

/// Noisy reading of a marker, or nullopt when the noiseless bearing is outside
/// the field of view or the noiseless range exceeds max_range.
std::optional<Measurement> measure(const SensorPose& sensor, const SensorModel& model, Point2 marker,
                                   double w_a, double w_r);

/// Sensor positions, relative to the marker, consistent with the measurement
/// when the sensor heading lies in theta_c +- d_theta_c.
ConvexPolygon feasible_sensor_region(double alpha, std::optional<double> r, const SensorModel& model,
                                     double theta_c, double d_theta_c);

/// Marker positions, relative to the sensor, consistent with the measurement.
ConvexPolygon feasible_marker_region(double alpha, std::optional<double> r, const SensorModel& model,
                                     double theta_c, double d_theta_c);

}  // namespace setloc::sense
