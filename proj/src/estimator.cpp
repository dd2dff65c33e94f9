#include "setloc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>

#include "setloc/errors.hpp"

namespace setloc::est {

using geom::Norm;

RigidBodySpec::RigidBodySpec(std::span<const Point2> body_points)
    : n_(body_points.size()), dist_(n_ * n_, 0.0), bearing_(n_ * n_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const Point2 d = body_points[j] - body_points[i];
      dist_[i * n_ + j] = geom::norm(d);
      bearing_[i * n_ + j] = std::atan2(d.y, d.x);
    }
  }
}

RigidBodySpec RigidBodySpec::from_offsets(std::span<const kin::MarkerOffset> offsets) {
  std::vector<Point2> pts;
  for (const kin::MarkerOffset& o : offsets) pts.push_back(geom::polar(o.delta_l, o.delta_theta));
  return RigidBodySpec(pts);
}

void StepDiagnostics::merge(const StepDiagnostics& o) {
  faults += o.faults;
  disconnected_arcs += o.disconnected_arcs;
  wide_sectors += o.wide_sectors;
  max_assignments = std::max(max_assignments, o.max_assignments);
  certain_updates += o.certain_updates;
}

EstimatorState propagate(const EstimatorState& state, const kin::Control& u, const Models& models) {
  if (models.mode == MotionMode::Omnidirectional) {
    return propagate_omnidirectional(state, models.v_max, models.robot.dt);
  }
  if (models.offsets.size() != state.markers.size()) {
    throw std::invalid_argument("marker offsets and marker sets differ in count");
  }
  EstimatorState next = state;
  const ConvexPolygon disturbance = geom::ball_outer_polygon(models.robot.eps_f, Norm::LInf);
  for (std::size_t j = 0; j < state.markers.size(); ++j) {
    const kin::DisplacementBox d =
        kin::displacement_bounds(u, state.heading, models.offsets[j], models.robot);
    const ConvexPolygon box = ConvexPolygon::box(d.dx, d.dy);
    next.markers[j] = geom::minkowski_sum(geom::minkowski_sum(state.markers[j], box), disturbance);
  }
  next.k = state.k + 1;
  return next;
}

EstimatorState propagate_omnidirectional(const EstimatorState& state, double v_max, double dt) {
  if (!(v_max >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("need v_max >= 0 and dt > 0");
  EstimatorState next = state;
  const ConvexPolygon reach = geom::ball_outer_polygon(v_max * dt, Norm::LInf);
  for (ConvexPolygon& p : next.markers) p = geom::minkowski_sum(p, reach);
  next.k = state.k + 1;
  return next;
}

namespace {

// Feasible-region constructor that reports an uninformative (too wide)
// sector as nullopt.
template <class F>
std::optional<ConvexPolygon> maybe_region(F&& make, StepDiagnostics& diag) {
  try {
    return make();
  } catch (const SectorTooWide&) {
    ++diag.wide_sectors;
    return std::nullopt;
  }
}

struct PendingMarkerUpdate {
  int sensor;
  int marker;
  ConvexPolygon region;  // L_xy(k+1) + hull of P_M over assignments
};

}  // namespace

EstimatorState update(const EstimatorState& predicted, const Batches& batches, const Models& models,
                      StepDiagnostics* diag_out) {
  StepDiagnostics diag;
  EstimatorState out = predicted;
  const std::size_t n = predicted.markers.size();
  std::vector<PendingMarkerUpdate> pending;

  for (std::size_t i = 0; i < batches.size() && i < predicted.sensor_xy.size(); ++i) {
    const auto& batch = batches[i];
    if (batch.empty()) continue;
    const int sid = static_cast<int>(i);
    const sense::SensorModel& model = models.sensors.at(i);
    const ConvexPolygon l_xy = predicted.sensor_xy[i];
    const AngleInterval l_theta = predicted.sensor_theta[i];

    const assoc::CandidateMatrix c =
        assoc::build_candidate_matrix(batch, predicted.markers, l_xy, l_theta, model, sid);
    std::vector<assoc::Assignment> assignments =
        assoc::enumerate_assignments(c, models.options.assignment_cap);
    diag.max_assignments = std::max(diag.max_assignments, assignments.size());

    // Each assignment carries its own sensor position set and heading arc.
    // A pass bounds the heading by the directions from the position set to
    // the matched marker sets (minus the readings), then bounds the position
    // by the sensor regions around each marker under that heading.
    struct Hypothesis {
      assoc::Assignment a;
      ConvexPolygon xy;
      AngleInterval theta;
    };
    std::vector<Hypothesis> live;
    live.reserve(assignments.size());
    for (assoc::Assignment& a : assignments) live.push_back({std::move(a), l_xy, l_theta});

    std::map<int, AngleInterval> shared_direction;  // first pass: all share l_xy
    auto heading_pass = [&](Hypothesis& h, bool shared) -> bool {
      for (std::size_t q = 0; q < h.a.size(); ++q) {
        const int j = h.a[q];
        AngleInterval dir;
        if (shared) {
          auto it = shared_direction.find(j);
          if (it == shared_direction.end()) {
            it = shared_direction
                     .emplace(j, geom::angular_hull(geom::minkowski_sum(predicted.markers[j], l_xy.negated())))
                     .first;
          }
          dir = it->second;
        } else {
          dir = geom::angular_hull(geom::minkowski_sum(predicted.markers[j], h.xy.negated()));
        }
        if (dir.is_full()) continue;
        const AngleInterval bound = dir.shifted(-batch[q].alpha).widened(model.eps_wa);
        const geom::AngleIntersection r = geom::intersect_angles(h.theta, bound);
        if (r.disconnected) ++diag.disconnected_arcs;
        if (!r.arc) return false;
        h.theta = *r.arc;
      }
      return true;
    };
    auto position_pass = [&](Hypothesis& h) -> bool {
      for (std::size_t q = 0; q < h.a.size(); ++q) {
        const ConvexPolygon& marker = predicted.markers[h.a[q]];
        const auto region = maybe_region(
            [&] {
              return geom::minkowski_sum(marker, sense::feasible_sensor_region(batch[q].alpha, batch[q].r, model,
                                                                              h.theta.center(),
                                                                              h.theta.half_width()));
            },
            diag);
        if (region) {
          auto set = geom::intersect(h.xy, *region);
          if (!set) return false;
          h.xy = std::move(*set);
        }
        if (models.options.range_rings && batch[q].r) {
          auto set = geom::clip_to_annulus(h.xy, marker, {std::max(0.0, *batch[q].r - model.eps_wr),
                                                          *batch[q].r + model.eps_wr});
          if (!set) return false;
          h.xy = std::move(*set);
        }
      }
      return true;
    };

    const int passes = std::max(1, models.options.coupled_passes);
    for (int pass = 0; pass < passes; ++pass) {
      std::vector<Hypothesis> next;
      bool heading_left = false;
      for (Hypothesis& h : live) {
        if (!heading_pass(h, pass == 0)) continue;
        heading_left = true;
        if (!position_pass(h)) continue;
        next.push_back(std::move(h));
      }
      if (next.empty()) {
        throw EmptySetFault(heading_left ? FaultStage::SensorPosition : FaultStage::SensorHeading, sid, -1);
      }
      live = std::move(next);
    }

    std::vector<AngleInterval> arcs;
    std::vector<ConvexPolygon> sets;
    std::vector<assoc::Assignment> survivors;
    for (const Hypothesis& h : live) {
      arcs.push_back(h.theta);
      sets.push_back(h.xy);
      survivors.push_back(h.a);
    }
    // Static sensors: both the old and the new set contain the truth, so
    // rounding growth from relaxed clipping is discarded.
    const AngleInterval theta_new = geom::enclose_angles(arcs);
    if (theta_new.width() < l_theta.width()) out.sensor_theta[i] = theta_new;
    const ConvexPolygon xy_new = geom::convex_hull(sets);
    if (xy_new.area() < l_xy.area()) out.sensor_xy[i] = xy_new;

    // Markers measured under every surviving assignment, applied after all
    // sensors have been processed: hull over assignments of the sensor set
    // plus the marker region seen from it.
    for (int j : assoc::markers_with_certain_measurement(survivors, n)) {
      std::vector<ConvexPolygon> readings;
      bool informative = true;
      for (const Hypothesis& h : live) {
        const auto q = static_cast<std::size_t>(std::find(h.a.begin(), h.a.end(), j) - h.a.begin());
        auto region = maybe_region(
            [&] {
              return geom::minkowski_sum(h.xy, sense::feasible_marker_region(batch[q].alpha, batch[q].r, model,
                                                                            h.theta.center(), h.theta.half_width()));
            },
            diag);
        if (!region) {
          informative = false;
          break;
        }
        readings.push_back(std::move(*region));
      }
      if (!informative) continue;
      pending.push_back({sid, j, geom::convex_hull(readings)});
    }
  }

  for (const PendingMarkerUpdate& u : pending) {
    auto set = geom::intersect(out.markers[u.marker], u.region);
    if (!set) throw EmptySetFault(FaultStage::Marker, u.sensor, u.marker);
    out.markers[u.marker] = *set;
    ++diag.certain_updates;
  }
  if (diag_out) diag_out->merge(diag);
  return out;
}

EstimatorState refine_rigid_body(const EstimatorState& state, const RigidBodySpec& spec, int ball_vertices,
                                 int sweeps) {
  const std::size_t n = state.markers.size();
  if (n < 2) return state;
  if (spec.size() != n) throw std::invalid_argument("rigid body spec and marker sets differ in count");
  EstimatorState out = state;
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const ConvexPolygon reach = geom::minkowski_sum(
            out.markers[j], geom::ball_outer_polygon(spec.distance(i, j), Norm::L2, ball_vertices));
        auto set = geom::intersect(out.markers[i], reach);
        if (!set) throw EmptySetFault(FaultStage::RigidBody, -1, static_cast<int>(i));
        out.markers[i] = *set;
      }
    }
  }
  return out;
}

ConvexPolygon estimate_body(const EstimatorState& state, double body_radius, int ball_vertices) {
  const ConvexPolygon hull = geom::convex_hull(state.markers);
  if (body_radius <= 0.0) return hull;
  return geom::minkowski_sum(hull, geom::ball_outer_polygon(body_radius, Norm::L2, ball_vertices));
}

AngleInterval estimate_heading(const EstimatorState& state, const RigidBodySpec& spec,
                               StepDiagnostics* diag) {
  const std::size_t n = state.markers.size();
  AngleInterval heading = AngleInterval::full();
  if (n < 2) return heading;
  for (std::size_t i = 0; i < n; ++i) {
    const ConvexPolygon neg_i = state.markers[i].negated();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const AngleInterval dir = geom::angular_hull(geom::minkowski_sum(state.markers[j], neg_i));
      if (dir.is_full()) continue;
      const geom::AngleIntersection r = geom::intersect_angles(heading, dir.shifted(-spec.bearing(i, j)));
      if (!r.arc) throw EmptySetFault(FaultStage::RobotHeading, -1, static_cast<int>(i));
      if (r.disconnected && diag) ++diag->disconnected_arcs;
      heading = *r.arc;
    }
  }
  return heading;
}

void reconstruct(EstimatorState& state, const Models& models, StepDiagnostics* diag) {
  state.body = estimate_body(state, models.options.body_radius, models.options.ball_vertices);
  state.heading = estimate_heading(state, models.rigid, diag);
}

EstimatorState step(const EstimatorState& state, const kin::Control& u, const Batches& batches,
                    const Models& models, StepDiagnostics* diag) {
  StepDiagnostics local;
  const bool fallback = models.options.fallback_predict;
  const EstimatorState predicted = propagate(state, u, models);

  EstimatorState updated = predicted;
  try {
    updated = update(predicted, batches, models, &local);
  } catch (const EmptySetFault&) {
    if (!fallback) throw;
    ++local.faults;
  } catch (const InconsistentBatch&) {
    if (!fallback) throw;
    ++local.faults;
  }

  EstimatorState refined = updated;
  try {
    refined = refine_rigid_body(updated, models.rigid, models.options.ball_vertices, models.options.rigid_sweeps);
  } catch (const EmptySetFault&) {
    if (!fallback) throw;
    ++local.faults;
  }

  refined.body = estimate_body(refined, models.options.body_radius, models.options.ball_vertices);
  try {
    refined.heading = estimate_heading(refined, models.rigid, &local);
    if (models.options.heading_propagation && models.mode == MotionMode::Bicycle && !state.heading.is_full()) {
      const geom::Interval yaw = kin::yaw_increment_bounds(u, models.robot);
      const AngleInterval advanced =
          state.heading.shifted(0.5 * (yaw.lo + yaw.hi)).widened(0.5 * (yaw.hi - yaw.lo));
      const geom::AngleIntersection r = geom::intersect_angles(refined.heading, advanced);
      if (r.disconnected) ++local.disconnected_arcs;
      if (!r.arc) throw EmptySetFault(FaultStage::RobotHeading, -1, -1);
      refined.heading = *r.arc;
    }
  } catch (const EmptySetFault&) {
    if (!fallback) throw;
    ++local.faults;
    refined.heading = models.mode == MotionMode::Bicycle
                          ? state.heading.widened(kin::max_yaw_increment(u, models.robot))
                          : AngleInterval::full();
  }
  if (diag) diag->merge(local);
  return refined;
}

}  // namespace setloc::est
