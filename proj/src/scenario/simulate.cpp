#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

#include "setloc/sampling.hpp"
#include "setloc/scenario.hpp"

namespace setloc::scn {

namespace {

constexpr double kTol = geom::kEps;

// Independent RNG stream per purpose, all derived from the run seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

// Disk of radius r around c lies inside p (exact for convex p).
bool contains_disk(const ConvexPolygon& p, Point2 c, double r, double tol) {
  if (r <= 0.0) return p.contains(c, tol);
  if (p.size() < 3) return false;
  const auto v = p.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 e = v[(i + 1) % v.size()] - v[i];
    if (geom::cross(e, c - v[i]) / geom::norm(e) < r - tol) return false;
  }
  return true;
}

Truth make_truth(const ScenarioConfig& cfg, const kin::RobotPose& pose, const std::vector<kin::MarkerOffset>& offsets) {
  Truth t;
  t.pose = pose;
  for (const kin::MarkerOffset& o : offsets) t.markers.push_back(kin::marker_position(pose, o));
  for (const SensorSpec& s : cfg.sensors) t.sensors.push_back(s.truth);
  if (cfg.mode == est::MotionMode::Bicycle) {
    t.body = ConvexPolygon::hull_of(kin::body_corners(pose, cfg.robot.model, cfg.robot.rear_overhang));
  } else {
    t.body = ConvexPolygon::point({pose.x, pose.y});
    t.body_radius = cfg.robot.body_radius;
  }
  return t;
}

est::EstimatorState initial_state(const ScenarioConfig& cfg, const Truth& truth, const est::Models& models,
                                  std::mt19937_64& rng) {
  est::EstimatorState s;
  const double hm = 0.5 * std::sqrt(cfg.initial.marker_area);
  for (const Point2& m : truth.markers) {
    Point2 c = m + cfg.initial.marker_center_offset;
    if (cfg.initial.randomize_centers) c = m + Point2{uniform_symmetric(rng, hm), uniform_symmetric(rng, hm)};
    s.markers.push_back(ConvexPolygon::square(c, cfg.initial.marker_area));
  }
  const double hs = 0.5 * std::sqrt(cfg.initial.sensor_area);
  const double ht = 0.5 * cfg.initial.sensor_theta_width;
  for (const SensorSpec& spec : cfg.sensors) {
    sense::SensorPose c = spec.truth;
    if (spec.estimate) {
      c = *spec.estimate;
    } else if (cfg.initial.randomize_centers) {
      c.xy = c.xy + Point2{uniform_symmetric(rng, hs), uniform_symmetric(rng, hs)};
      c.theta += uniform_symmetric(rng, ht);
    }
    s.sensor_xy.push_back(ConvexPolygon::square(c.xy, cfg.initial.sensor_area));
    s.sensor_theta.emplace_back(c.theta, ht);
  }
  est::reconstruct(s, models);
  return s;
}

StepMetrics set_metrics(const est::EstimatorState& s, const Truth& t) {
  StepMetrics m;
  const BodyMetrics b = compute_metrics(s.body, s.heading, t.body, t.pose.theta, t.body_radius);
  m.m1 = b.m1;
  m.m2 = b.m2;
  m.body_in = b.body_in;
  m.heading_in = b.heading_in;
  m.markers_in = true;
  for (std::size_t j = 0; j < t.markers.size(); ++j) m.markers_in &= s.markers[j].contains(t.markers[j], kTol);
  m.sensors_in = true;
  for (std::size_t i = 0; i < t.sensors.size(); ++i) {
    m.sensors_in &= s.sensor_xy[i].contains(t.sensors[i].xy, kTol) && s.sensor_theta[i].contains(t.sensors[i].theta, kTol);
  }
  m.body_area = s.body.area();
  m.heading_width = s.heading.width();
  return m;
}

StepMetrics particle_metrics(const pf::ParticleSet& ps, const est::Models& models, const Truth& t) {
  StepMetrics m;
  const ConvexPolygon body = pf::estimate_body_particles(ps, models.options.body_radius);
  const AngleInterval heading = pf::estimate_heading_particles(ps, models.rigid);
  const BodyMetrics b = compute_metrics(body, heading, t.body, t.pose.theta, t.body_radius);
  m.m1 = b.m1;
  m.m2 = b.m2;
  m.body_in = b.body_in;
  m.heading_in = b.heading_in;
  m.markers_in = true;
  for (std::size_t j = 0; j < t.markers.size(); ++j) {
    std::vector<Point2> cloud;
    for (const pf::Particle& p : ps.particles) cloud.push_back(p.markers[j]);
    m.markers_in &= ConvexPolygon::hull_of(cloud).contains(t.markers[j], kTol);
  }
  m.sensors_in = true;
  for (std::size_t i = 0; i < t.sensors.size(); ++i) {
    std::vector<Point2> cloud;
    std::vector<AngleInterval> headings;
    for (const pf::Particle& p : ps.particles) {
      cloud.push_back(p.sensor_xy[i]);
      headings.push_back(AngleInterval::point(p.sensor_theta[i]));
    }
    m.sensors_in &= ConvexPolygon::hull_of(cloud).contains(t.sensors[i].xy, kTol) &&
                    geom::enclose_angles(headings).contains(t.sensors[i].theta, kTol);
  }
  m.body_area = body.area();
  m.heading_width = heading.width();
  return m;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

BodyMetrics compute_metrics(const ConvexPolygon& body_est, const AngleInterval& heading_est,
                            const ConvexPolygon& truth_body, double truth_heading, double truth_radius) {
  BodyMetrics m;
  const ConvexPolygon truth_region =
      truth_radius > 0.0 ? geom::minkowski_sum(truth_body, geom::ball_outer_polygon(truth_radius, geom::Norm::L2, 32))
                         : truth_body;
  const double area = body_est.area();
  if (area > 0.0) {
    const auto overlap = geom::intersect(body_est, truth_region);
    m.m1 = overlap ? std::clamp(overlap->area() / area, 0.0, 1.0) : 0.0;
  }
  m.body_in = true;
  for (const Point2& v : truth_body.vertices()) m.body_in &= contains_disk(body_est, v, truth_radius, kTol);

  if (heading_est.is_full()) {
    m.m2 = geom::kTwoPi;
  } else {
    const double d = geom::wrap_angle(heading_est.center() - truth_heading);
    m.m2 = std::abs(d + heading_est.half_width()) + std::abs(d - heading_est.half_width());
  }
  m.heading_in = heading_est.contains(truth_heading, kTol);
  return m;
}

RunRecord simulate_run(const ScenarioConfig& cfg, const StepObserver& observer) {
  validate_config(cfg);
  const est::Models models = build_models(cfg);
  const std::vector<kin::Control> controls = expand_controls(cfg);
  const bool run_set = cfg.estimators != EstimatorChoice::FastSlam;
  const bool run_pf = cfg.estimators != EstimatorChoice::Set;
  const bool bicycle = cfg.mode == est::MotionMode::Bicycle;
  const sense::SensorModel& sm = cfg.sensor_model;

  std::mt19937_64 world = stream(cfg.seed, 1);
  std::mt19937_64 init = stream(cfg.seed, 2);
  const std::uint64_t pf_seed = std::mt19937_64(stream(cfg.seed, 3))();

  RunRecord rec;
  rec.steps = static_cast<int>(controls.size());
  Truth truth = make_truth(cfg, cfg.robot.initial_pose, models.offsets);

  est::EstimatorState state = initial_state(cfg, truth, models, init);
  bool set_alive = run_set;
  pf::ParticleSet particles;
  if (run_pf) particles = pf::init_particles(state, cfg.fastslam.particles, pf_seed);

  est::Batches batches(cfg.sensors.size());
  std::vector<std::vector<int>> true_markers(cfg.sensors.size());

  auto record = [&](int k) {
    StepMetrics sm_set;
    StepMetrics sm_pf;
    if (set_alive) {
      sm_set = set_metrics(state, truth);
      rec.rows.push_back({"set", k, sm_set});
    }
    if (run_pf) {
      sm_pf = particle_metrics(particles, models, truth);
      rec.rows.push_back({"fastslam", k, sm_pf});
    }
    if (observer) {
      StepView view;
      view.k = k;
      view.truth = &truth;
      view.batches = &batches;
      view.true_markers = &true_markers;
      view.set_state = set_alive ? &state : nullptr;
      view.particles = run_pf ? &particles : nullptr;
      view.set_metrics = set_alive ? &sm_set : nullptr;
      view.fastslam_metrics = run_pf ? &sm_pf : nullptr;
      observer(view);
    }
  };
  record(0);

  const std::size_t n_markers = truth.markers.size();
  for (int k = 1; k <= rec.steps; ++k) {
    const kin::Control u = controls[static_cast<std::size_t>(k - 1)];

    // True motion.
    kin::RobotPose pose = truth.pose;
    if (bicycle) {
      const kin::RobotModel& rm = cfg.robot.model;
      const double w_v = uniform_symmetric(world, rm.eps_v);
      const double w_delta = uniform_symmetric(world, rm.eps_delta);
      pose = kin::bicycle_step(truth.pose, u, w_v, w_delta, rm);
      // The rigid truth differs from the one-step marker model by w_f, which
      // must respect the bound the estimator assumes.
      for (std::size_t j = 0; j < n_markers; ++j) {
        const Point2 modeled = kin::marker_step(truth.markers[j], u, {w_v, w_delta, {}}, truth.pose.theta,
                                                models.offsets[j], rm);
        const Point2 w_f = kin::marker_position(pose, models.offsets[j]) - modeled;
        if (std::max(std::abs(w_f.x), std::abs(w_f.y)) > models.robot.eps_f) {
          throw Error("simulated marker disturbance exceeds eps_f at step " + std::to_string(k));
        }
      }
    } else {
      const double scale = uniform(world, 0.0, 1.0);
      pose.x += scale * u.v * cfg.robot.model.dt;
      pose.y += scale * u.delta * cfg.robot.model.dt;
    }
    truth = make_truth(cfg, pose, models.offsets);

    // Readings, shuffled within each batch.
    for (std::size_t i = 0; i < cfg.sensors.size(); ++i) {
      std::vector<std::pair<sense::Measurement, int>> readings;
      for (std::size_t j = 0; j < n_markers; ++j) {
        const double w_a = uniform_symmetric(world, cfg.measurement_noise_scale * sm.eps_wa);
        const double w_r = uniform_symmetric(world, cfg.measurement_noise_scale * sm.eps_wr);
        std::optional<sense::Measurement> m;
        if (cfg.gate_noiseless) {
          m = sense::measure(truth.sensors[i], sm, truth.markers[j], w_a, w_r);
        } else {
          // Gate on the noisy reading instead.
          sense::SensorModel open = sm;
          open.fov = geom::kTwoPi;
          open.max_range = std::numeric_limits<double>::infinity();
          m = sense::measure(truth.sensors[i], open, truth.markers[j], w_a, w_r);
          const double range = m->r ? *m->r : geom::norm(truth.markers[j] - truth.sensors[i].xy);
          if (range > sm.max_range || (sm.fov < geom::kTwoPi && std::abs(m->alpha) > 0.5 * sm.fov)) m.reset();
        }
        if (m) readings.emplace_back(*m, static_cast<int>(j));
      }
      std::shuffle(readings.begin(), readings.end(), world);
      batches[i].clear();
      true_markers[i].clear();
      for (std::size_t q = 0; q < readings.size(); ++q) {
        sense::Measurement m = readings[q].first;
        m.sensor_id = static_cast<int>(i);
        m.slot = static_cast<int>(q);
        batches[i].push_back(m);
        true_markers[i].push_back(readings[q].second);
      }
    }

    if (set_alive) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        state = est::step(state, u, batches, models, &rec.diagnostics);
      } catch (const EmptySetFault& e) {
        rec.fault = FaultInfo{k, e.what()};
        set_alive = false;
      } catch (const InconsistentBatch& e) {
        rec.fault = FaultInfo{k, e.what()};
        set_alive = false;
      } catch (const CapExceeded& e) {
        rec.fault = FaultInfo{k, e.what()};
        set_alive = false;
      }
      rec.set_wall_ms.emplace_back(k, elapsed_ms(t0));
    }
    if (run_pf) {
      const auto t0 = std::chrono::steady_clock::now();
      pf::predict(particles, u, models);
      pf::weight_update(particles, batches, models, cfg.fastslam);
      pf::resample(particles);
      rec.fastslam_wall_ms.emplace_back(k, elapsed_ms(t0));
    }
    record(k);
  }
  rec.fastslam_degenerate = particles.degenerate_events;
  return rec;
}

Summary summarize(const RunRecord& record, const std::string& estimator) {
  Summary s;
  std::vector<double> m1;
  std::vector<double> m2;
  int contained = 0;
  for (const MetricRow& r : record.rows) {
    if (r.estimator != estimator) continue;
    m1.push_back(r.metrics.m1);
    m2.push_back(r.metrics.m2);
    const StepMetrics& m = r.metrics;
    if (m.body_in && m.heading_in && m.markers_in && m.sensors_in) ++contained;
  }
  s.steps = static_cast<int>(m1.size());
  if (m1.empty()) return s;
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    sd = std::sqrt(acc / static_cast<double>(v.size()));
  };
  mean_std(m1, s.mean_m1, s.std_m1);
  mean_std(m2, s.mean_m2, s.std_m2);
  s.containment_rate = static_cast<double>(contained) / static_cast<double>(s.steps);
  return s;
}

}  // namespace setloc::scn
