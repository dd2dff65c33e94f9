#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "setloc/scenario.hpp"

namespace setloc::scn {

namespace {

constexpr double kDeg = geom::kPi / 180.0;

// Parking-lot sensor layout: 21 stereo sensors on a rectangle 4 m outside the
// swept area of the default loop, each aimed at the lot centre.
constexpr double kParkingSensors[21][3] = {
    {-8.18, -5.45, 49.0},   {-2.1, -5.45, 64.6},   {3.98, -5.45, 85.3},   {10.06, -5.45, 107.3},
    {16.13, -5.45, 125.2},  {21.69, -4.93, 137.8}, {21.69, 1.15, 151.7},  {21.69, 7.23, 170.4},
    {21.69, 13.31, -168.7}, {21.69, 19.39, -150.3}, {21.69, 25.46, -136.8}, {15.61, 25.46, -123.9},
    {9.54, 25.46, -105.5},  {3.46, 25.46, -83.4},  {-2.62, 25.46, -63.1}, {-8.7, 25.46, -48.0},
    {-11.22, 21.91, -35.9}, {-11.22, 15.83, -19.5}, {-11.22, 9.75, 0.9},  {-11.22, 3.67, 21.1},
    {-11.22, -2.41, 37.0},
};

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& msg) {
  throw ConfigError(line_of(n), key, msg);
}

// Source line of every key seen, for diagnostics raised after parsing.
thread_local std::map<std::string, int>* key_lines = nullptr;

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  if (!map.IsMap()) fail(map, where, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    const std::string path = where.empty() ? key : where + "." + key;
    if (!allowed.count(key)) fail(kv.first, path, "unknown key");
    if (key_lines) (*key_lines)[path] = line_of(kv.first);
  }
}

double read_double(const YAML::Node& parent, const char* key, const std::string& path, double fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) fail(n, path, "must be finite");
    return v;
  } catch (const YAML::BadConversion&) {
    fail(n, path, "expected a number");
  }
}

int read_int(const YAML::Node& parent, const char* key, const std::string& path, int fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  try {
    return n.as<int>();
  } catch (const YAML::BadConversion&) {
    fail(n, path, "expected an integer");
  }
}

bool read_bool(const YAML::Node& parent, const char* key, const std::string& path, bool fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  try {
    return n.as<bool>();
  } catch (const YAML::BadConversion&) {
    fail(n, path, "expected true or false");
  }
}

std::string read_string(const YAML::Node& parent, const char* key, const std::string& path,
                        const std::string& fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  if (!n.IsScalar()) fail(n, path, "expected a string");
  return n.as<std::string>();
}

Point2 read_point(const YAML::Node& parent, const char* key, const std::string& path, Point2 fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  if (!n.IsSequence() || n.size() != 2) fail(n, path, "expected [x, y]");
  try {
    return {n[0].as<double>(), n[1].as<double>()};
  } catch (const YAML::BadConversion&) {
    fail(n, path, "expected [x, y]");
  }
}

sense::SensorPose read_pose(const YAML::Node& n, const std::string& path) {
  check_keys(n, {"x", "y", "theta_deg"}, path);
  for (const char* k : {"x", "y", "theta_deg"}) {
    if (!n[k]) fail(n, path + "." + k, "missing");
  }
  return {{read_double(n, "x", path + ".x", 0.0), read_double(n, "y", path + ".y", 0.0)},
          geom::wrap_angle(read_double(n, "theta_deg", path + ".theta_deg", 0.0) * kDeg)};
}

}  // namespace

ScenarioConfig parking_defaults() {
  ScenarioConfig cfg;
  cfg.mode = est::MotionMode::Bicycle;
  cfg.seed = 1;
  cfg.robot.model.wheelbase = 2.1;
  cfg.robot.model.dt = 0.5;
  cfg.robot.model.body_length = 4.0;
  cfg.robot.model.body_width = 1.8;
  cfg.robot.model.eps_v = 0.1;
  cfg.robot.model.eps_delta = 0.5 * kDeg;
  cfg.robot.eps_f_auto = true;
  cfg.robot.rear_overhang = 0.5 * (cfg.robot.model.body_length - cfg.robot.model.wheelbase);
  cfg.robot.initial_pose = {0.0, 0.0, 0.0};
  cfg.initial = {};
  cfg.sensor_model = {sense::SensorKind::AngleRange, 1.0 * kDeg, 0.1, 70.0 * kDeg, 20.0};
  for (const auto& s : kParkingSensors) cfg.sensors.push_back({{{s[0], s[1]}, s[2] * kDeg}, std::nullopt});

  // Closed loop: two 10 m and two 8 m straights joined by quarter turns.
  const double turn = std::asin(0.5 * geom::kPi / 20.0 * 2.1 / 0.5) / kDeg;
  const double v = 1.0;
  for (int side = 0; side < 2; ++side) {
    cfg.trajectory.push_back({v, 0.0, 0, 0, 20});
    cfg.trajectory.push_back({v, turn * kDeg, 0, 0, 20});
    cfg.trajectory.push_back({v, 0.0, 0, 0, 16});
    cfg.trajectory.push_back({v, turn * kDeg, 0, 0, 20});
  }
  return cfg;
}

ScenarioConfig omni_defaults() {
  ScenarioConfig cfg;
  cfg.mode = est::MotionMode::Omnidirectional;
  cfg.seed = 1;
  cfg.robot.model.dt = 0.2;
  cfg.robot.model.eps_v = 0.0;
  cfg.robot.model.eps_delta = 0.0;
  cfg.robot.eps_f_auto = false;
  cfg.robot.model.eps_f = 0.0;
  cfg.robot.v_max = 0.10;
  cfg.robot.body_radius = 0.12;
  cfg.robot.initial_pose = {0.0, 0.0, 0.0};
  cfg.initial.marker_area = 0.01;
  cfg.initial.sensor_area = 0.0004;
  cfg.initial.sensor_theta_width = 2.0 * kDeg;
  cfg.sensor_model = {sense::SensorKind::AngleRange, 8.05 * kDeg, 0.073, geom::kTwoPi, 8.0};
  cfg.sensors = {{{{-1.5, -1.5}, 45.0 * kDeg}, std::nullopt},
                 {{{3.5, -1.5}, 135.0 * kDeg}, std::nullopt},
                 {{{1.0, 3.5}, -90.0 * kDeg}, std::nullopt}};
  // Square loop, 2 m sides, 0.08 m/s commanded.
  const double s = 0.08;
  for (int lap = 0; lap < 2; ++lap) {
    cfg.trajectory.push_back({0, 0, s, 0, 125});
    cfg.trajectory.push_back({0, 0, 0, s, 125});
    cfg.trajectory.push_back({0, 0, -s, 0, 125});
    cfg.trajectory.push_back({0, 0, 0, -s, 125});
  }
  cfg.estimators = EstimatorChoice::Both;
  return cfg;
}

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.line >= 0 ? e.mark.line + 1 : 0, "", e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(0, "", "empty configuration");
  std::map<std::string, int> lines;
  key_lines = &lines;
  struct Reset {
    ~Reset() { key_lines = nullptr; }
  } reset;
  check_keys(root, {"mode", "seed", "estimators", "fault_policy", "robot", "initial_sets", "sensor_model",
                    "sensors", "trajectory", "estimator", "fastslam", "world"},
             "");

  const std::string mode = read_string(root, "mode", "mode", "bicycle");
  ScenarioConfig cfg;
  if (mode == "bicycle") {
    cfg = parking_defaults();
  } else if (mode == "omnidirectional") {
    cfg = omni_defaults();
  } else {
    fail(root["mode"], "mode", "expected bicycle or omnidirectional");
  }

  if (root["seed"]) {
    try {
      cfg.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::BadConversion&) {
      fail(root["seed"], "seed", "expected a non-negative integer");
    }
  }
  const std::string est_name = read_string(root, "estimators", "estimators", "both");
  if (est_name == "set") cfg.estimators = EstimatorChoice::Set;
  else if (est_name == "fastslam") cfg.estimators = EstimatorChoice::FastSlam;
  else if (est_name == "both") cfg.estimators = EstimatorChoice::Both;
  else fail(root["estimators"], "estimators", "expected set, fastslam or both");

  const std::string policy = read_string(root, "fault_policy", "fault_policy", "abort");
  if (policy == "abort") cfg.fallback_predict = false;
  else if (policy == "fallback_predict") cfg.fallback_predict = true;
  else fail(root["fault_policy"], "fault_policy", "expected abort or fallback_predict");

  if (const YAML::Node r = root["robot"]) {
    check_keys(r, {"wheelbase", "dt", "body_length", "body_width", "rear_overhang", "eps_v", "eps_delta_deg",
                   "eps_f", "initial_pose", "v_max", "body_radius"},
               "robot");
    kin::RobotModel& m = cfg.robot.model;
    m.wheelbase = read_double(r, "wheelbase", "robot.wheelbase", m.wheelbase);
    m.dt = read_double(r, "dt", "robot.dt", m.dt);
    m.body_length = read_double(r, "body_length", "robot.body_length", m.body_length);
    m.body_width = read_double(r, "body_width", "robot.body_width", m.body_width);
    cfg.robot.rear_overhang = r["rear_overhang"]
                                  ? read_double(r, "rear_overhang", "robot.rear_overhang", 0.0)
                                  : 0.5 * (m.body_length - m.wheelbase);
    m.eps_v = read_double(r, "eps_v", "robot.eps_v", m.eps_v);
    m.eps_delta = read_double(r, "eps_delta_deg", "robot.eps_delta_deg", m.eps_delta / kDeg) * kDeg;
    if (const YAML::Node f = r["eps_f"]) {
      if (f.IsScalar() && f.as<std::string>() == "auto") {
        cfg.robot.eps_f_auto = true;
      } else {
        cfg.robot.eps_f_auto = false;
        m.eps_f = read_double(r, "eps_f", "robot.eps_f", 0.0);
      }
    }
    if (const YAML::Node p = r["initial_pose"]) {
      const sense::SensorPose pose = read_pose(p, "robot.initial_pose");
      cfg.robot.initial_pose = {pose.xy.x, pose.xy.y, pose.theta};
    }
    cfg.robot.v_max = read_double(r, "v_max", "robot.v_max", cfg.robot.v_max);
    cfg.robot.body_radius = read_double(r, "body_radius", "robot.body_radius", cfg.robot.body_radius);
  }

  if (const YAML::Node n = root["initial_sets"]) {
    check_keys(n, {"marker_area", "sensor_area", "sensor_theta_width_deg", "randomize_centers",
                   "marker_center_offset"},
               "initial_sets");
    InitialSetConfig& s = cfg.initial;
    s.marker_area = read_double(n, "marker_area", "initial_sets.marker_area", s.marker_area);
    s.sensor_area = read_double(n, "sensor_area", "initial_sets.sensor_area", s.sensor_area);
    s.sensor_theta_width =
        read_double(n, "sensor_theta_width_deg", "initial_sets.sensor_theta_width_deg", s.sensor_theta_width / kDeg) *
        kDeg;
    s.randomize_centers = read_bool(n, "randomize_centers", "initial_sets.randomize_centers", s.randomize_centers);
    s.marker_center_offset =
        read_point(n, "marker_center_offset", "initial_sets.marker_center_offset", s.marker_center_offset);
  }

  if (const YAML::Node n = root["sensor_model"]) {
    check_keys(n, {"kind", "eps_wa_deg", "eps_wr", "fov_deg", "max_range", "gating"}, "sensor_model");
    sense::SensorModel& m = cfg.sensor_model;
    const std::string kind = read_string(n, "kind", "sensor_model.kind",
                                         m.kind == sense::SensorKind::AngleOnly ? "angle_only" : "angle_range");
    if (kind == "angle_only") m.kind = sense::SensorKind::AngleOnly;
    else if (kind == "angle_range") m.kind = sense::SensorKind::AngleRange;
    else fail(n["kind"], "sensor_model.kind", "expected angle_only or angle_range");
    m.eps_wa = read_double(n, "eps_wa_deg", "sensor_model.eps_wa_deg", m.eps_wa / kDeg) * kDeg;
    m.eps_wr = read_double(n, "eps_wr", "sensor_model.eps_wr", m.eps_wr);
    m.fov = read_double(n, "fov_deg", "sensor_model.fov_deg", m.fov / kDeg) * kDeg;
    m.max_range = read_double(n, "max_range", "sensor_model.max_range", m.max_range);
    const std::string gating = read_string(n, "gating", "sensor_model.gating", "noiseless");
    if (gating == "noiseless") cfg.gate_noiseless = true;
    else if (gating == "noisy") cfg.gate_noiseless = false;
    else fail(n["gating"], "sensor_model.gating", "expected noiseless or noisy");
  }

  if (const YAML::Node n = root["sensors"]) {
    if (!n.IsSequence()) fail(n, "sensors", "expected a list");
    cfg.sensors.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string path = "sensors[" + std::to_string(i) + "]";
      const YAML::Node s = n[i];
      check_keys(s, {"x", "y", "theta_deg", "estimate"}, path);
      for (const char* k : {"x", "y", "theta_deg"}) {
        if (!s[k]) fail(s, path + "." + k, "missing");
      }
      SensorSpec spec;
      spec.truth = {{read_double(s, "x", path + ".x", 0), read_double(s, "y", path + ".y", 0)},
                    geom::wrap_angle(read_double(s, "theta_deg", path + ".theta_deg", 0) * kDeg)};
      if (const YAML::Node e = s["estimate"]) spec.estimate = read_pose(e, path + ".estimate");
      cfg.sensors.push_back(spec);
    }
  }

  if (const YAML::Node n = root["trajectory"]) {
    if (!n.IsSequence()) fail(n, "trajectory", "expected a list");
    cfg.trajectory.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      const std::string path = "trajectory[" + std::to_string(i) + "]";
      const YAML::Node s = n[i];
      TrajectorySegment seg;
      if (cfg.mode == est::MotionMode::Bicycle) {
        check_keys(s, {"v", "delta_deg", "steps"}, path);
        seg.v = read_double(s, "v", path + ".v", 0.0);
        seg.delta = read_double(s, "delta_deg", path + ".delta_deg", 0.0) * kDeg;
      } else {
        check_keys(s, {"vx", "vy", "steps"}, path);
        seg.vx = read_double(s, "vx", path + ".vx", 0.0);
        seg.vy = read_double(s, "vy", path + ".vy", 0.0);
      }
      if (!s["steps"]) fail(s, path + ".steps", "missing");
      seg.steps = read_int(s, "steps", path + ".steps", 0);
      if (seg.steps < 0) fail(s["steps"], path + ".steps", "must be >= 0");
      cfg.trajectory.push_back(seg);
    }
  }

  if (const YAML::Node n = root["estimator"]) {
    check_keys(n, {"ball_vertices", "rigid_sweeps", "assignment_cap", "coupled_passes", "range_rings",
                   "heading_propagation"},
               "estimator");
    cfg.estimator.coupled_passes =
        read_int(n, "coupled_passes", "estimator.coupled_passes", cfg.estimator.coupled_passes);
    cfg.estimator.range_rings = read_bool(n, "range_rings", "estimator.range_rings", cfg.estimator.range_rings);
    cfg.estimator.heading_propagation = read_bool(n, "heading_propagation", "estimator.heading_propagation",
                                                  cfg.estimator.heading_propagation);
    cfg.estimator.ball_vertices = read_int(n, "ball_vertices", "estimator.ball_vertices", cfg.estimator.ball_vertices);
    cfg.estimator.rigid_sweeps = read_int(n, "rigid_sweeps", "estimator.rigid_sweeps", cfg.estimator.rigid_sweeps);
    const int cap = read_int(n, "assignment_cap", "estimator.assignment_cap",
                             static_cast<int>(cfg.estimator.assignment_cap));
    if (cap < 1) fail(n["assignment_cap"], "estimator.assignment_cap", "must be >= 1");
    cfg.estimator.assignment_cap = static_cast<std::size_t>(cap);
  }

  if (const YAML::Node n = root["fastslam"]) {
    check_keys(n, {"particles", "sigma_fraction", "landmark_update"}, "fastslam");
    cfg.fastslam.particles = read_int(n, "particles", "fastslam.particles", cfg.fastslam.particles);
    cfg.fastslam.sigma_fraction = read_double(n, "sigma_fraction", "fastslam.sigma_fraction", cfg.fastslam.sigma_fraction);
    cfg.fastslam.landmark_update = read_bool(n, "landmark_update", "fastslam.landmark_update", cfg.fastslam.landmark_update);
  }

  if (const YAML::Node n = root["world"]) {
    check_keys(n, {"measurement_noise_scale"}, "world");
    cfg.measurement_noise_scale = read_double(n, "measurement_noise_scale", "world.measurement_noise_scale",
                                              cfg.measurement_noise_scale);
  }

  // Range checks that can point at a line.
  auto positive = [&](const YAML::Node& parent, const char* key, const std::string& path, double v) {
    if (!(v > 0.0)) fail(parent[key] ? parent[key] : parent, path, "must be > 0");
  };
  auto non_negative = [&](const YAML::Node& parent, const char* key, const std::string& path, double v) {
    if (!(v >= 0.0)) fail(parent[key] ? parent[key] : parent, path, "must be >= 0");
  };
  const YAML::Node r = root["robot"] ? root["robot"] : root;
  positive(r, "wheelbase", "robot.wheelbase", cfg.robot.model.wheelbase);
  positive(r, "dt", "robot.dt", cfg.robot.model.dt);
  non_negative(r, "eps_v", "robot.eps_v", cfg.robot.model.eps_v);
  non_negative(r, "eps_delta_deg", "robot.eps_delta_deg", cfg.robot.model.eps_delta);
  non_negative(r, "eps_f", "robot.eps_f", cfg.robot.model.eps_f);
  non_negative(r, "v_max", "robot.v_max", cfg.robot.v_max);
  non_negative(r, "body_radius", "robot.body_radius", cfg.robot.body_radius);
  const YAML::Node sm = root["sensor_model"] ? root["sensor_model"] : root;
  non_negative(sm, "eps_wa_deg", "sensor_model.eps_wa_deg", cfg.sensor_model.eps_wa);
  non_negative(sm, "eps_wr", "sensor_model.eps_wr", cfg.sensor_model.eps_wr);
  positive(sm, "fov_deg", "sensor_model.fov_deg", cfg.sensor_model.fov);
  positive(sm, "max_range", "sensor_model.max_range", cfg.sensor_model.max_range);
  const YAML::Node is = root["initial_sets"] ? root["initial_sets"] : root;
  non_negative(is, "marker_area", "initial_sets.marker_area", cfg.initial.marker_area);
  non_negative(is, "sensor_area", "initial_sets.sensor_area", cfg.initial.sensor_area);
  non_negative(is, "sensor_theta_width_deg", "initial_sets.sensor_theta_width_deg", cfg.initial.sensor_theta_width);
  const YAML::Node fs = root["fastslam"] ? root["fastslam"] : root;
  if (cfg.fastslam.particles < 1) fail(fs["particles"] ? fs["particles"] : fs, "fastslam.particles", "must be >= 1");
  positive(fs, "sigma_fraction", "fastslam.sigma_fraction", cfg.fastslam.sigma_fraction);
  const YAML::Node en = root["estimator"] ? root["estimator"] : root;
  if (cfg.estimator.ball_vertices < 4 || cfg.estimator.ball_vertices > static_cast<int>(geom::kMaxVertices)) {
    fail(en["ball_vertices"] ? en["ball_vertices"] : en, "estimator.ball_vertices", "must be in [4, 32]");
  }
  if (cfg.estimator.coupled_passes < 1) {
    fail(en["coupled_passes"] ? en["coupled_passes"] : en, "estimator.coupled_passes", "must be >= 1");
  }
  const YAML::Node w = root["world"] ? root["world"] : root;
  non_negative(w, "measurement_noise_scale", "world.measurement_noise_scale", cfg.measurement_noise_scale);
  if (cfg.estimator.rigid_sweeps < 0) {
    fail(en["rigid_sweeps"] ? en["rigid_sweeps"] : en, "estimator.rigid_sweeps", "must be >= 0");
  }
  cfg.source_lines = std::move(lines);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ScenarioConfig& cfg) {
  const bool bicycle = cfg.mode == est::MotionMode::Bicycle;
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value << (bicycle ? "bicycle" : "omnidirectional");
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;
  e << YAML::Key << "estimators" << YAML::Value
    << (cfg.estimators == EstimatorChoice::Set ? "set" : cfg.estimators == EstimatorChoice::FastSlam ? "fastslam" : "both");
  e << YAML::Key << "fault_policy" << YAML::Value << (cfg.fallback_predict ? "fallback_predict" : "abort");

  const kin::RobotModel& m = cfg.robot.model;
  e << YAML::Key << "robot" << YAML::Value << YAML::BeginMap;
  if (bicycle) {
    e << YAML::Key << "wheelbase" << YAML::Value << m.wheelbase;
  }
  e << YAML::Key << "dt" << YAML::Value << m.dt;
  if (bicycle) {
    e << YAML::Key << "body_length" << YAML::Value << m.body_length;
    e << YAML::Key << "body_width" << YAML::Value << m.body_width;
    e << YAML::Key << "rear_overhang" << YAML::Value << cfg.robot.rear_overhang;
    e << YAML::Key << "eps_v" << YAML::Value << m.eps_v;
    e << YAML::Key << "eps_delta_deg" << YAML::Value << m.eps_delta / kDeg;
    if (cfg.robot.eps_f_auto) e << YAML::Key << "eps_f" << YAML::Value << "auto";
    else e << YAML::Key << "eps_f" << YAML::Value << m.eps_f;
  } else {
    e << YAML::Key << "v_max" << YAML::Value << cfg.robot.v_max;
    e << YAML::Key << "body_radius" << YAML::Value << cfg.robot.body_radius;
  }
  e << YAML::Key << "initial_pose" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "x" << YAML::Value << cfg.robot.initial_pose.x;
  e << YAML::Key << "y" << YAML::Value << cfg.robot.initial_pose.y;
  e << YAML::Key << "theta_deg" << YAML::Value << cfg.robot.initial_pose.theta / kDeg;
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "initial_sets" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "marker_area" << YAML::Value << cfg.initial.marker_area;
  e << YAML::Key << "sensor_area" << YAML::Value << cfg.initial.sensor_area;
  e << YAML::Key << "sensor_theta_width_deg" << YAML::Value << cfg.initial.sensor_theta_width / kDeg;
  e << YAML::Key << "randomize_centers" << YAML::Value << cfg.initial.randomize_centers;
  e << YAML::Key << "marker_center_offset" << YAML::Value << YAML::Flow << YAML::BeginSeq
    << cfg.initial.marker_center_offset.x << cfg.initial.marker_center_offset.y << YAML::EndSeq;
  e << YAML::EndMap;

  const sense::SensorModel& s = cfg.sensor_model;
  e << YAML::Key << "sensor_model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << (s.kind == sense::SensorKind::AngleOnly ? "angle_only" : "angle_range");
  e << YAML::Key << "eps_wa_deg" << YAML::Value << s.eps_wa / kDeg;
  e << YAML::Key << "eps_wr" << YAML::Value << s.eps_wr;
  e << YAML::Key << "fov_deg" << YAML::Value << s.fov / kDeg;
  e << YAML::Key << "max_range" << YAML::Value << s.max_range;
  e << YAML::Key << "gating" << YAML::Value << (cfg.gate_noiseless ? "noiseless" : "noisy");
  e << YAML::EndMap;

  e << YAML::Key << "sensors" << YAML::Value << YAML::BeginSeq;
  for (const SensorSpec& sp : cfg.sensors) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "x" << YAML::Value << sp.truth.xy.x;
    e << YAML::Key << "y" << YAML::Value << sp.truth.xy.y;
    e << YAML::Key << "theta_deg" << YAML::Value << sp.truth.theta / kDeg;
    if (sp.estimate) {
      e << YAML::Key << "estimate" << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "x" << YAML::Value << sp.estimate->xy.x;
      e << YAML::Key << "y" << YAML::Value << sp.estimate->xy.y;
      e << YAML::Key << "theta_deg" << YAML::Value << sp.estimate->theta / kDeg;
      e << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "trajectory" << YAML::Value << YAML::BeginSeq;
  for (const TrajectorySegment& t : cfg.trajectory) {
    e << YAML::Flow << YAML::BeginMap;
    if (bicycle) {
      e << YAML::Key << "v" << YAML::Value << t.v;
      e << YAML::Key << "delta_deg" << YAML::Value << t.delta / kDeg;
    } else {
      e << YAML::Key << "vx" << YAML::Value << t.vx;
      e << YAML::Key << "vy" << YAML::Value << t.vy;
    }
    e << YAML::Key << "steps" << YAML::Value << t.steps;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;

  e << YAML::Key << "estimator" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "ball_vertices" << YAML::Value << cfg.estimator.ball_vertices;
  e << YAML::Key << "rigid_sweeps" << YAML::Value << cfg.estimator.rigid_sweeps;
  e << YAML::Key << "assignment_cap" << YAML::Value << cfg.estimator.assignment_cap;
  e << YAML::Key << "coupled_passes" << YAML::Value << cfg.estimator.coupled_passes;
  e << YAML::Key << "range_rings" << YAML::Value << cfg.estimator.range_rings;
  e << YAML::Key << "heading_propagation" << YAML::Value << cfg.estimator.heading_propagation;
  e << YAML::EndMap;

  e << YAML::Key << "fastslam" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "particles" << YAML::Value << cfg.fastslam.particles;
  e << YAML::Key << "sigma_fraction" << YAML::Value << cfg.fastslam.sigma_fraction;
  e << YAML::Key << "landmark_update" << YAML::Value << cfg.fastslam.landmark_update;
  e << YAML::EndMap;

  e << YAML::Key << "world" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "measurement_noise_scale" << YAML::Value << cfg.measurement_noise_scale;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::vector<kin::Control> expand_controls(const ScenarioConfig& cfg) {
  std::vector<kin::Control> out;
  for (const TrajectorySegment& t : cfg.trajectory) {
    for (int i = 0; i < t.steps; ++i) {
      if (cfg.mode == est::MotionMode::Bicycle) out.push_back({t.v, t.delta});
      else out.push_back({t.vx, t.vy});  // omnidirectional: velocity components
    }
  }
  return out;
}

std::vector<kin::MarkerOffset> marker_offsets(const ScenarioConfig& cfg) {
  if (cfg.mode == est::MotionMode::Omnidirectional) return {kin::MarkerOffset{0.0, 0.0}};
  return kin::corner_marker_offsets(cfg.robot.model, cfg.robot.rear_overhang);
}

double resolved_eps_f(const ScenarioConfig& cfg) {
  if (!cfg.robot.eps_f_auto || cfg.mode != est::MotionMode::Bicycle) return cfg.robot.model.eps_f;
  double reach = 0.0;
  for (const kin::MarkerOffset& o : marker_offsets(cfg)) reach = std::max(reach, o.delta_l);
  double gap = 0.0;
  for (const kin::Control& u : expand_controls(cfg)) {
    gap = std::max(gap, kin::discretization_gap(reach, kin::max_yaw_increment(u, cfg.robot.model)));
  }
  // Relative slack for rounding in the simulated world.
  return gap * (1.0 + 1e-6) + 1e-12;
}

est::Models build_models(const ScenarioConfig& cfg) {
  est::Models m;
  m.mode = cfg.mode;
  m.robot = cfg.robot.model;
  m.robot.eps_f = resolved_eps_f(cfg);
  m.offsets = marker_offsets(cfg);
  m.v_max = cfg.robot.v_max;
  m.sensors.assign(cfg.sensors.size(), cfg.sensor_model);
  m.rigid = est::RigidBodySpec::from_offsets(m.offsets);
  m.options = cfg.estimator;
  m.options.fallback_predict = cfg.fallback_predict;
  m.options.body_radius = cfg.mode == est::MotionMode::Omnidirectional ? cfg.robot.body_radius : 0.0;
  return m;
}

void validate_config(const ScenarioConfig& cfg) {
  const kin::RobotModel& m = cfg.robot.model;
  auto line = [&](const std::string& key) {
    // Closest recorded ancestor of the key.
    std::string k = key;
    for (;;) {
      auto it = cfg.source_lines.find(k);
      if (it != cfg.source_lines.end()) return it->second;
      const auto cut = k.find_last_of(".[");
      if (cut == std::string::npos) return 0;
      k = k.substr(0, cut);
    }
  };
  auto error = [&](const std::string& key, const std::string& msg) { return ConfigError(line(key), key, msg); };
  if (cfg.sensors.empty()) throw error("sensors", "at least one sensor is required");
  if (cfg.trajectory.empty()) throw error("trajectory", "at least one segment is required");
  if (cfg.sensor_model.fov > geom::kTwoPi + 1e-12) throw error("sensor_model.fov_deg", "must be <= 360");
  if (cfg.mode == est::MotionMode::Bicycle) {
    if (!(m.body_length > 0.0) || !(m.body_width > 0.0)) {
      throw error("robot.body_length", "body dimensions must be > 0");
    }
    if (cfg.robot.rear_overhang < 0.0 || cfg.robot.rear_overhang > m.body_length) {
      throw error("robot.rear_overhang", "must lie within the body length");
    }
    for (const TrajectorySegment& t : cfg.trajectory) {
      if (std::abs(t.delta) + m.eps_delta >= 0.5 * geom::kPi) {
        throw error("trajectory.delta_deg", "steering plus its noise bound must stay below 90 degrees");
      }
    }
    if (!cfg.robot.eps_f_auto) {
      double reach = 0.0;
      for (const kin::MarkerOffset& o : marker_offsets(cfg)) reach = std::max(reach, o.delta_l);
      for (const kin::Control& u : expand_controls(cfg)) {
        const double need = kin::discretization_gap(reach, kin::max_yaw_increment(u, m));
        if (need > m.eps_f) {
          std::ostringstream os;
          os << "bound " << m.eps_f << " m is below the one-step marker model error " << need
             << " m on this trajectory; use eps_f: auto";
          throw error("robot.eps_f", os.str());
        }
      }
    }
  } else {
    for (const TrajectorySegment& t : cfg.trajectory) {
      if (std::hypot(t.vx, t.vy) > cfg.robot.v_max + 1e-12) {
        throw error("trajectory", "commanded speed exceeds robot.v_max");
      }
    }
  }
  // Initial containment: only deterministic centres can be checked; random
  // centres place the truth inside by construction.
  const double half_marker = 0.5 * std::sqrt(cfg.initial.marker_area);
  if (!cfg.initial.randomize_centers) {
    const Point2 o = cfg.initial.marker_center_offset;
    if (std::max(std::abs(o.x), std::abs(o.y)) > half_marker + geom::kEps) {
      throw error("initial_sets.marker_center_offset",
                        "initial-containment precondition violated: true markers lie outside their initial sets");
    }
  }
  const double half_sensor = 0.5 * std::sqrt(cfg.initial.sensor_area);
  for (std::size_t i = 0; i < cfg.sensors.size(); ++i) {
    const SensorSpec& s = cfg.sensors[i];
    if (!s.estimate) continue;
    const Point2 d = s.truth.xy - s.estimate->xy;
    const double dth = std::abs(geom::wrap_angle(s.truth.theta - s.estimate->theta));
    if (std::max(std::abs(d.x), std::abs(d.y)) > half_sensor + geom::kEps ||
        dth > 0.5 * cfg.initial.sensor_theta_width + geom::kEps) {
      throw error("sensors[" + std::to_string(i) + "].estimate",
                        "initial-containment precondition violated: true sensor pose lies outside its initial set");
    }
  }
}

}  // namespace setloc::scn
