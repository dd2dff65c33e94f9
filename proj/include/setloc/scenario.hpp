#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "setloc/errors.hpp"
#include "setloc/estimator.hpp"
#include "setloc/fastslam.hpp"

namespace setloc::scn {

using geom::AngleInterval;
using geom::ConvexPolygon;
using geom::Point2;

enum class EstimatorChoice { Set, FastSlam, Both };

struct SensorSpec {
  sense::SensorPose truth;
  std::optional<sense::SensorPose> estimate;  // centre of the initial sets
};

/// Bicycle segments use v/delta; omnidirectional segments use vx/vy.
struct TrajectorySegment {
  double v = 0.0;
  double delta = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  int steps = 0;
};

struct RobotConfig {
  kin::RobotModel model;
  double rear_overhang = 0.95;
  bool eps_f_auto = true;
  kin::RobotPose initial_pose;
  double v_max = 0.0;        // omnidirectional speed bound
  double body_radius = 0.0;  // omnidirectional body disk
};

struct InitialSetConfig {
  double marker_area = 1.0;                      // V(P_j(0)), m^2
  double sensor_area = 0.01;                     // V(L_xy(0)), m^2
  double sensor_theta_width = 2.0 * geom::kPi / 180.0;  // V(L_theta(0)), rad
  bool randomize_centers = true;  // truth uniformly placed inside each set
  Point2 marker_center_offset;    // applied when centres are not randomized
};

struct ScenarioConfig {
  est::MotionMode mode = est::MotionMode::Bicycle;
  std::uint64_t seed = 1;
  EstimatorChoice estimators = EstimatorChoice::Both;
  bool fallback_predict = false;
  RobotConfig robot;
  InitialSetConfig initial;
  sense::SensorModel sensor_model;
  bool gate_noiseless = true;
  std::vector<SensorSpec> sensors;
  std::vector<TrajectorySegment> trajectory;
  est::EstimatorOptions estimator;
  pf::FastSlamOptions fastslam;
  // Fault injection: the world draws reading noise from this multiple of the
  // bounds the estimator assumes. Above 1 the containment guarantee is void.
  double measurement_noise_scale = 1.0;
  std::map<std::string, int> source_lines;  // key path -> line, when parsed
};

ScenarioConfig parking_defaults();
ScenarioConfig omni_defaults();

/// Parses YAML text. Throws ConfigError with the line of the offending key.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& cfg);

/// Checks parameter ranges, noise-bound consistency and that every true
/// initial state lies inside its initial set. Throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

std::vector<kin::Control> expand_controls(const ScenarioConfig& cfg);
/// Marker disturbance bound used by the estimator (computed for eps_f: auto).
double resolved_eps_f(const ScenarioConfig& cfg);
std::vector<kin::MarkerOffset> marker_offsets(const ScenarioConfig& cfg);
est::Models build_models(const ScenarioConfig& cfg);

struct StepMetrics {
  double m1 = 0.0;
  double m2 = 0.0;
  bool body_in = false;
  bool heading_in = false;
  bool markers_in = false;
  bool sensors_in = false;
  double body_area = 0.0;
  double heading_width = 0.0;
};

struct BodyMetrics {
  double m1 = 0.0;
  double m2 = 0.0;
  bool body_in = false;
  bool heading_in = false;
};

/// m1 = area(body ∩ truth) / area(body); m2 = sum of the heading interval's
/// deviations from the true heading. The true body is truth_body grown by a
/// disk of truth_radius.
BodyMetrics compute_metrics(const ConvexPolygon& body_est, const AngleInterval& heading_est,
                            const ConvexPolygon& truth_body, double truth_heading, double truth_radius = 0.0);

struct Truth {
  kin::RobotPose pose;
  std::vector<Point2> markers;
  std::vector<sense::SensorPose> sensors;
  ConvexPolygon body = ConvexPolygon::point({});
  double body_radius = 0.0;
};

/// Everything known about one step, handed to run observers.
struct StepView {
  int k = 0;
  const Truth* truth = nullptr;
  const est::Batches* batches = nullptr;         // empty at k = 0
  const std::vector<std::vector<int>>* true_markers = nullptr;  // per sensor, per slot
  const est::EstimatorState* set_state = nullptr;   // null when not run or faulted
  const pf::ParticleSet* particles = nullptr;       // null when not run
  const StepMetrics* set_metrics = nullptr;
  const StepMetrics* fastslam_metrics = nullptr;
};

using StepObserver = std::function<void(const StepView&)>;

struct MetricRow {
  std::string estimator;  // "set" or "fastslam"
  int k = 0;
  StepMetrics metrics;
};

struct FaultInfo {
  int k = 0;
  std::string what;
};

struct RunRecord {
  std::vector<MetricRow> rows;
  std::vector<std::pair<int, double>> set_wall_ms;  // (k, ms)
  std::vector<std::pair<int, double>> fastslam_wall_ms;
  std::optional<FaultInfo> fault;  // set estimator fault under the abort policy
  est::StepDiagnostics diagnostics;
  int fastslam_degenerate = 0;
  int steps = 0;
};

RunRecord simulate_run(const ScenarioConfig& cfg, const StepObserver& observer = {});

struct Summary {
  double mean_m1 = 0.0;
  double std_m1 = 0.0;
  double mean_m2 = 0.0;
  double std_m2 = 0.0;
  double containment_rate = 0.0;  // fraction of steps with every flag true
  int steps = 0;
};

Summary summarize(const RunRecord& record, const std::string& estimator);

// Output formats. Column order is fixed.
void write_metrics_csv(std::ostream& os, const RunRecord& record);
void write_timing_csv(std::ostream& os, const RunRecord& record);
/// Observer that writes one JSON object per line per geometric object.
StepObserver geometry_writer(std::ostream& os);

enum class SweepParameter { EpsWa, EpsWr, MarkerArea, EpsV, EpsDelta };
SweepParameter parse_sweep_parameter(const std::string& name);
std::string to_string(SweepParameter p);
/// Applies a sweep value in config units (degrees for angles).
void apply_sweep_value(ScenarioConfig& cfg, SweepParameter p, double value);

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  std::string estimator;
  Summary summary;
  std::string status;  // "ok" or a fault description
};

std::vector<SweepRow> sensitivity_sweep(const ScenarioConfig& base, SweepParameter parameter,
                                        const std::vector<double>& values, int seeds, int jobs = 1);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

std::string format_double(double v);

}  // namespace setloc::scn
