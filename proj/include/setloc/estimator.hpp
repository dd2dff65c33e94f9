#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "setloc/correspondence.hpp"
#include "setloc/geom2d.hpp"
#include "setloc/kinematics.hpp"
#include "setloc/sensing.hpp"

namespace setloc::est {

using geom::AngleInterval;
using geom::ConvexPolygon;
using geom::Point2;

struct EstimatorState {
  std::vector<ConvexPolygon> markers;     // P_j
  std::vector<ConvexPolygon> sensor_xy;   // L_i,xy
  std::vector<AngleInterval> sensor_theta;  // L_i,theta
  ConvexPolygon body = ConvexPolygon::point({});
  AngleInterval heading = AngleInterval::full();
  int k = 0;
};

/// Inter-marker distances and the bearing of each marker pair in the body
/// frame.
class RigidBodySpec {
 public:
  RigidBodySpec() = default;
  /// From marker positions in any body-fixed frame whose x axis is the
  /// heading.
  explicit RigidBodySpec(std::span<const Point2> body_points);
  static RigidBodySpec from_offsets(std::span<const kin::MarkerOffset> offsets);

  std::size_t size() const { return n_; }
  double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  /// Angle of p_j - p_i relative to the heading.
  double bearing(std::size_t i, std::size_t j) const { return bearing_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> dist_;
  std::vector<double> bearing_;
};

enum class MotionMode { Bicycle, Omnidirectional };

struct EstimatorOptions {
  int ball_vertices = 16;
  int rigid_sweeps = 1;
  std::size_t assignment_cap = assoc::kDefaultAssignmentCap;
  bool fallback_predict = false;
  double body_radius = 0.0;  // body = hull(P_j) + l2 ball of this radius
  // Alternating heading/position passes per assignment. One pass is the
  // plain heading-then-position update.
  int coupled_passes = 2;
  // Also clip sensor positions by the range annulus around each matched
  // marker set, which does not depend on the heading.
  bool range_rings = true;
  // Intersect the marker-derived heading with the previous heading advanced
  // by the bounded yaw increment (bicycle mode).
  bool heading_propagation = true;
};

struct Models {
  MotionMode mode = MotionMode::Bicycle;
  kin::RobotModel robot;
  std::vector<kin::MarkerOffset> offsets;
  double v_max = 0.0;  // omnidirectional speed bound
  std::vector<sense::SensorModel> sensors;
  RigidBodySpec rigid;
  EstimatorOptions options;
};

/// Per-sensor measurement lists, indexed by sensor id.
using Batches = std::vector<std::vector<sense::Measurement>>;

struct StepDiagnostics {
  int faults = 0;              // faults absorbed by the fallback policy
  int disconnected_arcs = 0;   // angle intersections that were two arcs
  int wide_sectors = 0;        // constraints skipped for lack of heading info
  std::size_t max_assignments = 0;
  std::size_t certain_updates = 0;

  void merge(const StepDiagnostics& o);
};

EstimatorState propagate(const EstimatorState& state, const kin::Control& u, const Models& models);
EstimatorState propagate_omnidirectional(const EstimatorState& state, double v_max, double dt);

/// Measurement update of the sensor and marker sets.
EstimatorState update(const EstimatorState& predicted, const Batches& batches, const Models& models,
                      StepDiagnostics* diag = nullptr);

EstimatorState refine_rigid_body(const EstimatorState& state, const RigidBodySpec& spec,
                                 int ball_vertices = 16, int sweeps = 1);

ConvexPolygon estimate_body(const EstimatorState& state, double body_radius = 0.0,
                            int ball_vertices = 16);
AngleInterval estimate_heading(const EstimatorState& state, const RigidBodySpec& spec,
                               StepDiagnostics* diag = nullptr);

/// Fills body and heading from the marker sets.
void reconstruct(EstimatorState& state, const Models& models, StepDiagnostics* diag = nullptr);

EstimatorState step(const EstimatorState& state, const kin::Control& u, const Batches& batches,
                    const Models& models, StepDiagnostics* diag = nullptr);

}  // namespace setloc::est
