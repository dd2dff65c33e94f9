#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "setloc/errors.hpp"
#include "setloc/estimator.hpp"
#include "setloc/scenario.hpp"
#include "support.hpp"

using namespace setloc::est;
using setloc::geom::AngleInterval;
using setloc::geom::ConvexPolygon;
using setloc::geom::Interval;
using setloc::geom::kPi;
using setloc::geom::Point2;
using setloc::kin::Control;
using setloc::kin::RobotPose;
using testsupport::deg;

namespace {

struct World {
  RobotPose pose;
  std::vector<Point2> markers;
  std::vector<setloc::sense::SensorPose> sensors;
};

Models parking_models() {
  setloc::scn::ScenarioConfig cfg = setloc::scn::parking_defaults();
  return setloc::scn::build_models(cfg);
}

std::vector<setloc::sense::SensorPose> parking_sensors() {
  std::vector<setloc::sense::SensorPose> out;
  for (const auto& s : setloc::scn::parking_defaults().sensors) out.push_back(s.truth);
  return out;
}

// Noise-free poses along the bundled loop.
std::vector<RobotPose> parking_path() {
  const auto cfg = setloc::scn::parking_defaults();
  std::vector<RobotPose> poses{cfg.robot.initial_pose};
  for (const Control& u : setloc::scn::expand_controls(cfg)) {
    poses.push_back(setloc::kin::bicycle_step(poses.back(), u, 0, 0, cfg.robot.model));
  }
  return poses;
}

World world_at(const RobotPose& pose, const Models& models, std::vector<setloc::sense::SensorPose> sensors) {
  World w{pose, {}, std::move(sensors)};
  for (const auto& o : models.offsets) w.markers.push_back(setloc::kin::marker_position(pose, o));
  return w;
}

// Shuffled in-bound readings, as the simulator produces them.
template <class Rng>
Batches observe(const World& w, const Models& models, Rng& rng, double noise = 1.0) {
  Batches b(w.sensors.size());
  for (std::size_t i = 0; i < w.sensors.size(); ++i) {
    const auto& m = models.sensors[i];
    for (const Point2& p : w.markers) {
      auto z = setloc::sense::measure(w.sensors[i], m, p, noise * setloc::uniform_symmetric(rng, m.eps_wa),
                                      noise * setloc::uniform_symmetric(rng, m.eps_wr));
      if (!z) continue;
      z->sensor_id = static_cast<int>(i);
      b[i].push_back(*z);
    }
    std::shuffle(b[i].begin(), b[i].end(), rng);
    for (std::size_t s = 0; s < b[i].size(); ++s) b[i][s].slot = static_cast<int>(s);
  }
  return b;
}

// Box of the given side placed at random so that it contains p.
template <class Rng>
ConvexPolygon box_around(Point2 p, double side, Rng& rng) {
  const double ox = setloc::uniform(rng, 0.0, side), oy = setloc::uniform(rng, 0.0, side);
  return ConvexPolygon::box({p.x - ox, p.x - ox + side}, {p.y - oy, p.y - oy + side});
}

template <class Rng>
EstimatorState sets_around(const World& w, Rng& rng, double marker_side, double sensor_side, double theta_width) {
  EstimatorState s;
  for (const Point2& p : w.markers) s.markers.push_back(box_around(p, marker_side, rng));
  for (const auto& l : w.sensors) {
    s.sensor_xy.push_back(box_around(l.xy, sensor_side, rng));
    s.sensor_theta.emplace_back(l.theta + setloc::uniform_symmetric(rng, 0.5 * theta_width), 0.5 * theta_width);
  }
  return s;
}

EstimatorState exact_state(const World& w) {
  EstimatorState s;
  for (const Point2& p : w.markers) s.markers.push_back(ConvexPolygon::point(p));
  for (const auto& l : w.sensors) {
    s.sensor_xy.push_back(ConvexPolygon::point(l.xy));
    s.sensor_theta.push_back(AngleInterval::point(l.theta));
  }
  return s;
}

bool contains_all(const EstimatorState& s, const World& w, double tol = 1e-9) {
  for (std::size_t j = 0; j < w.markers.size(); ++j) {
    if (!s.markers[j].contains(w.markers[j], tol)) return false;
  }
  for (std::size_t i = 0; i < w.sensors.size(); ++i) {
    if (!s.sensor_xy[i].contains(w.sensors[i].xy, tol)) return false;
    if (!s.sensor_theta[i].contains(w.sensors[i].theta, tol)) return false;
  }
  return true;
}

bool subset(const ConvexPolygon& inner, const ConvexPolygon& outer, double tol = 1e-7) {
  return std::all_of(inner.vertices().begin(), inner.vertices().end(),
                     [&](Point2 v) { return outer.contains(v, tol); });
}

double distance_to(const ConvexPolygon& p, Point2 s) {
  if (p.contains(s, 0.0)) return 0.0;
  const auto v = p.vertices();
  double best = setloc::geom::norm(s - v[0]);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2 a = v[i], b = v[(i + 1) % v.size()];
    const Point2 e = b - a;
    const double len2 = setloc::geom::dot(e, e);
    const double t = len2 > 0 ? std::clamp(setloc::geom::dot(s - a, e) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, setloc::geom::norm(s - (a + t * e)));
  }
  return best;
}

double farthest(const ConvexPolygon& p, Point2 s) {
  double best = 0.0;
  for (const Point2& v : p.vertices()) best = std::max(best, setloc::geom::norm(s - v));
  return best;
}

}  // namespace

TEST_CASE("propagate") {
  Models models = parking_models();
  models.robot.eps_v = 0.0;
  models.robot.eps_delta = 0.0;
  models.robot.eps_f = 0.0;
  const World w = world_at({1.0, 2.0, 0.3}, models, parking_sensors());
  EstimatorState s = exact_state(w);
  s.heading = AngleInterval::point(0.3);

  SUBCASE("standing still changes nothing") {
    const EstimatorState p = propagate(s, {0.0, deg(10)}, models);
    for (std::size_t j = 0; j < w.markers.size(); ++j) {
      REQUIRE(p.markers[j].is_point());
      CHECK(p.markers[j][0].x == doctest::Approx(w.markers[j].x));
      CHECK(p.markers[j][0].y == doctest::Approx(w.markers[j].y));
    }
    CHECK(p.k == s.k + 1);
  }
  SUBCASE("straight exact control translates along the heading") {
    const EstimatorState p = propagate(s, {1.0, 0.0}, models);
    for (std::size_t j = 0; j < w.markers.size(); ++j) {
      const Point2 want = w.markers[j] + 0.5 * Point2{std::cos(0.3), std::sin(0.3)};
      CHECK(p.markers[j].x_range().hi == doctest::Approx(want.x));
      CHECK(p.markers[j].y_range().lo == doctest::Approx(want.y));
      CHECK(p.markers[j].area() == doctest::Approx(0.0));
    }
  }
  SUBCASE("sensor sets are untouched") {
    const EstimatorState p = propagate(s, {1.0, deg(5)}, models);
    for (std::size_t i = 0; i < w.sensors.size(); ++i) CHECK(p.sensor_xy[i][0] == s.sensor_xy[i][0]);
  }
}

TEST_CASE("propagate never shrinks a marker set") {
  const Models models = parking_models();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    EstimatorState s;
    for (int j = 0; j < 4; ++j) s.markers.push_back(testsupport::random_polygon(rng, 7, {}, setloc::uniform(rng, 0.1, 2)));
    s.heading = AngleInterval(setloc::uniform(rng, -kPi, kPi), setloc::uniform(rng, 0, 0.5));
    const Control u{setloc::uniform(rng, -1.5, 1.5), setloc::uniform(rng, -deg(30), deg(30))};
    const EstimatorState p = propagate(s, u, models);
    for (int j = 0; j < 4; ++j) REQUIRE(p.markers[j].area() >= s.markers[j].area() - 1e-12);
  }
}

TEST_CASE("omnidirectional propagation") {
  EstimatorState s;
  s.markers.push_back(ConvexPolygon::box({0, 1}, {0, 1}));
  CHECK(propagate_omnidirectional(s, 0.0, 0.2).markers[0].area() == doctest::Approx(1.0));
  const auto p = propagate_omnidirectional(s, 0.10, 0.2).markers[0];
  CHECK(p.x_range().lo == doctest::Approx(-0.02));
  CHECK(p.x_range().hi == doctest::Approx(1.02));
  CHECK(p.y_range().lo == doctest::Approx(-0.02));
  CHECK(p.area() == doctest::Approx(1.04 * 1.04));
  CHECK_THROWS_AS(propagate_omnidirectional(s, -1.0, 0.2), std::invalid_argument);

  std::mt19937_64 rng(8);
  const ConvexPolygon start = testsupport::random_polygon(rng, 6, {}, 0.3);
  EstimatorState q;
  q.markers.push_back(start);
  const ConvexPolygon grown = propagate_omnidirectional(q, 0.10, 0.2).markers[0];
  for (int t = 0; t < 1000; ++t) {
    const Point2 from = setloc::sample_uniform(start, rng);
    const Point2 to = from + setloc::geom::polar(setloc::uniform(rng, 0, 0.02), setloc::uniform(rng, -kPi, kPi));
    REQUIRE(grown.contains(to));
  }
}

TEST_CASE("update: exact readings are a fixed point") {
  Models models = parking_models();
  for (auto& m : models.sensors) {
    m.eps_wa = 0.0;
    m.eps_wr = 0.0;
  }
  const World w = world_at({5.0, 3.0, 0.2}, models, parking_sensors());
  std::mt19937_64 rng(1);
  const EstimatorState s = exact_state(w);
  const EstimatorState u = update(s, observe(w, models, rng), models);
  CHECK(contains_all(u, w, 1e-7));
  for (std::size_t j = 0; j < w.markers.size(); ++j) CHECK(u.markers[j].area() == doctest::Approx(0.0));
}

TEST_CASE("update contracts and keeps the truth") {
  const Models models = parking_models();
  const auto path = parking_path();
  std::mt19937_64 rng(99);
  int shrunk = 0;
  for (int t = 0; t < 1000; ++t) {
    const RobotPose pose = path[rng() % path.size()];
    const World w = world_at(pose, models, parking_sensors());
    const EstimatorState s = sets_around(w, rng, setloc::uniform(rng, 0.3, 1.5), setloc::uniform(rng, 0.05, 0.5),
                                         setloc::uniform(rng, deg(1), deg(10)));
    const Batches b = observe(w, models, rng);
    StepDiagnostics diag;
    const EstimatorState u = update(s, b, models, &diag);
    REQUIRE(contains_all(u, w));
    for (std::size_t j = 0; j < s.markers.size(); ++j) {
      REQUIRE(subset(u.markers[j], s.markers[j]));
      shrunk += u.markers[j].area() < s.markers[j].area() - 1e-9;
    }
    for (std::size_t i = 0; i < s.sensor_xy.size(); ++i) {
      REQUIRE(subset(u.sensor_xy[i], s.sensor_xy[i]));
      REQUIRE(u.sensor_theta[i].width() <= s.sensor_theta[i].width() + 1e-12);
    }
  }
  CHECK(shrunk > 1000);
}

TEST_CASE("update soundness does not depend on sensor order") {
  const Models models = parking_models();
  const auto path = parking_path();
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const World w = world_at(path[rng() % path.size()], models, parking_sensors());
    const EstimatorState s = sets_around(w, rng, 1.0, 0.1, deg(2));
    const Batches b = observe(w, models, rng);

    std::vector<std::size_t> perm(w.sensors.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = perm.size() - 1 - i;
    Models rm = models;
    World rw = w;
    EstimatorState rs = s;
    Batches rb(b.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      rm.sensors[i] = models.sensors[perm[i]];
      rw.sensors[i] = w.sensors[perm[i]];
      rs.sensor_xy[i] = s.sensor_xy[perm[i]];
      rs.sensor_theta[i] = s.sensor_theta[perm[i]];
      rb[i] = b[perm[i]];
      for (auto& z : rb[i]) z.sensor_id = static_cast<int>(i);
    }
    REQUIRE(contains_all(update(s, b, models), w));
    REQUIRE(contains_all(update(rs, rb, rm), rw));
  }
}

TEST_CASE("update faults on readings that break the bounds") {
  const Models models = parking_models();
  const World w = world_at({5.0, 3.0, 0.2}, models, parking_sensors());
  std::mt19937_64 rng(4);
  const EstimatorState s = sets_around(w, rng, 0.2, 0.02, deg(1));
  const Batches wild = observe(w, models, rng, 40.0);
  CHECK_THROWS_AS(update(s, wild, models), setloc::Error);
}

TEST_CASE("rigid-body refinement") {
  const std::vector<Point2> body{{0, 0}, {3, 0}, {3, 2}, {0, 2}};
  const RigidBodySpec spec(body);
  CHECK(spec.distance(0, 2) == doctest::Approx(std::sqrt(13.0)));
  CHECK(spec.distance(2, 0) == spec.distance(0, 2));
  CHECK(spec.bearing(0, 1) == doctest::Approx(0.0));
  CHECK(spec.bearing(1, 0) == doctest::Approx(kPi));

  SUBCASE("consistent points are unchanged") {
    EstimatorState s;
    for (Point2 p : body) s.markers.push_back(ConvexPolygon::point(p));
    const EstimatorState r = refine_rigid_body(s, spec);
    for (std::size_t j = 0; j < 4; ++j) {
      REQUIRE(r.markers[j].is_point());
      CHECK(r.markers[j][0] == body[j]);
    }
  }
  SUBCASE("a huge set shrinks to the ring polygon around a point") {
    const RigidBodySpec pair(std::vector<Point2>{{0, 0}, {3, 0}});
    EstimatorState s;
    s.markers = {ConvexPolygon::box({-50, 50}, {-50, 50}), ConvexPolygon::point({3, 0})};
    const EstimatorState r = refine_rigid_body(s, pair);
    const ConvexPolygon ring = setloc::geom::ball_outer_polygon(3.0, setloc::geom::Norm::L2, 16).translated({3, 0});
    CHECK(subset(r.markers[0], ring));
    CHECK(r.markers[0].area() == doctest::Approx(ring.area()).epsilon(1e-9));
  }
  SUBCASE("random configurations keep the truth") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 500; ++t) {
      const double th = setloc::uniform(rng, -kPi, kPi);
      const Point2 o{setloc::uniform(rng, -10, 10), setloc::uniform(rng, -10, 10)};
      std::vector<Point2> truth;
      for (Point2 p : body) truth.push_back(o + Point2{p.x * std::cos(th) - p.y * std::sin(th), p.x * std::sin(th) + p.y * std::cos(th)});
      EstimatorState s;
      for (Point2 p : truth) s.markers.push_back(box_around(p, setloc::uniform(rng, 0.1, 3), rng));
      const EstimatorState r = refine_rigid_body(s, spec, 16, 2);
      for (std::size_t j = 0; j < 4; ++j) REQUIRE(r.markers[j].contains(truth[j]));
    }
  }
  SUBCASE("impossible configurations fault") {
    EstimatorState s;
    s.markers = {ConvexPolygon::point({0, 0}), ConvexPolygon::point({30, 0}), ConvexPolygon::point({30, 2}),
                 ConvexPolygon::point({0, 2})};
    CHECK_THROWS_AS(refine_rigid_body(s, spec), setloc::EmptySetFault);
  }
}

TEST_CASE("body and heading reconstruction") {
  const Models models = parking_models();
  const World w = world_at({2.0, -1.0, 0.6}, models, {});
  SUBCASE("exact marker points") {
    const EstimatorState s = exact_state(w);
    const ConvexPolygon body = estimate_body(s);
    CHECK(body.area() == doctest::Approx(4.0 * 1.8));
    const AngleInterval h = estimate_heading(s, models.rigid);
    CHECK(h.center() == doctest::Approx(0.6));
    CHECK(h.width() == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("boxed markers") {
    EstimatorState s;
    for (Point2 p : w.markers) s.markers.push_back(ConvexPolygon::box({p.x - 0.1, p.x + 0.1}, {p.y - 0.1, p.y + 0.1}));
    const ConvexPolygon body = estimate_body(s);
    for (Point2 p : w.markers) CHECK(body.contains(p));
    for (const auto& m : s.markers) CHECK(subset(m, body));
    const AngleInterval h = estimate_heading(s, models.rigid);
    CHECK(h.width() > 0.0);
    CHECK(h.contains(0.6));
  }
  SUBCASE("body radius grows the hull") {
    EstimatorState s;
    s.markers.push_back(ConvexPolygon::point({1, 1}));
    const ConvexPolygon body = estimate_body(s, 0.12);
    CHECK(body.contains({1.12, 1.0}));
    CHECK(body.area() >= kPi * 0.12 * 0.12);
    CHECK(estimate_heading(s, RigidBodySpec(std::vector<Point2>{{0, 0}})).is_full());
  }
}

TEST_CASE("noise-free run tracks the truth") {
  // Zero control and reading noise; the only slack left is the bound on the
  // one-step model's discretization gap against the rigid world.
  auto cfg = setloc::scn::parking_defaults();
  cfg.robot.model.eps_v = cfg.robot.model.eps_delta = 0.0;
  cfg.sensor_model.eps_wa = cfg.sensor_model.eps_wr = 0.0;
  const Models models = setloc::scn::build_models(cfg);
  CHECK(models.robot.eps_f < 0.01);
  const auto controls = setloc::scn::expand_controls(cfg);
  REQUIRE(controls.size() >= 150);
  RobotPose pose = cfg.robot.initial_pose;
  EstimatorState s = exact_state(world_at(pose, models, parking_sensors()));
  reconstruct(s, models);
  std::mt19937_64 rng(2);
  double worst_area = 0.0, worst_heading = 0.0;
  for (std::size_t k = 0; k < 150; ++k) {
    pose = setloc::kin::bicycle_step(pose, controls[k], 0, 0, models.robot);
    const World w = world_at(pose, models, parking_sensors());
    s = step(s, controls[k], observe(w, models, rng), models);
    REQUIRE(contains_all(s, w));
    REQUIRE(s.heading.contains(pose.theta));
    for (const auto& m : s.markers) worst_area = std::max(worst_area, m.area());
    worst_heading = std::max(worst_heading, s.heading.width());
  }
  CHECK(worst_area < 1e-3);
  CHECK(worst_heading < deg(0.5));
}

TEST_CASE("stationary omnidirectional robot: marker area never grows") {
  auto cfg = setloc::scn::omni_defaults();
  Models models = setloc::scn::build_models(cfg);
  models.v_max = 0.0;
  std::vector<setloc::sense::SensorPose> sensors;
  for (const auto& s : cfg.sensors) sensors.push_back(s.truth);
  World w{{0.8, 0.6, 0.0}, {{0.8, 0.6}}, sensors};
  std::mt19937_64 rng(6);
  EstimatorState s = sets_around(w, rng, 0.4, 0.02, deg(2));
  reconstruct(s, models);
  double area = s.markers[0].area();
  for (int k = 0; k < 100; ++k) {
    s = step(s, {}, observe(w, models, rng), models);
    REQUIRE(contains_all(s, w));
    REQUIRE(s.markers[0].area() <= area + 1e-12);
    area = s.markers[0].area();
  }
  CHECK(area < 0.16);
}

TEST_CASE("fallback keeps the prediction on a fault") {
  Models models = parking_models();
  const World w = world_at({5.0, 3.0, 0.2}, models, parking_sensors());
  std::mt19937_64 rng(4);
  EstimatorState s = sets_around(w, rng, 0.2, 0.02, deg(1));
  reconstruct(s, models);
  const Batches wild = observe(w, models, rng, 40.0);
  CHECK_THROWS(step(s, {}, wild, models));
  models.options.fallback_predict = true;
  StepDiagnostics diag;
  const EstimatorState r = step(s, {}, wild, models, &diag);
  CHECK(diag.faults >= 1);
  CHECK(r.k == s.k + 1);
}

TEST_CASE("annulus clipping is a sound superset") {
  std::mt19937_64 rng(41);
  int members = 0, nulls = 0;
  for (int t = 0; t < 300; ++t) {
    const ConvexPolygon centers = testsupport::random_polygon(rng, 5, {setloc::uniform(rng, -2, 2), setloc::uniform(rng, -2, 2)},
                                                              setloc::uniform(rng, 0.01, 1.0));
    const ConvexPolygon q = testsupport::random_polygon(rng, 6, {setloc::uniform(rng, -6, 6), setloc::uniform(rng, -6, 6)},
                                                        setloc::uniform(rng, 0.5, 3.0));
    const double lo = setloc::uniform(rng, 0.0, 6.0);
    const Interval range{lo, lo + setloc::uniform(rng, 0.0, 1.0)};
    const auto clipped = setloc::geom::clip_to_annulus(q, centers, range);
    if (!clipped) ++nulls;
    else REQUIRE(subset(*clipped, q, 1e-7));
    // Re-clipping puts vertices exactly on the hole boundary.
    const auto again = clipped ? setloc::geom::clip_to_annulus(*clipped, centers, range) : std::nullopt;
    for (int k = 0; k < 100; ++k) {
      const Point2 s = setloc::sample_uniform(q, rng);
      // Some centre is at a distance in range iff the nearest is not beyond
      // hi and the farthest is not short of lo (the centre set is connected).
      const bool member = distance_to(centers, s) <= range.hi && farthest(centers, s) >= range.lo;
      if (!member) continue;
      ++members;
      REQUIRE(clipped);
      REQUIRE(clipped->contains(s, 1e-9));
      REQUIRE(again);
      REQUIRE(again->contains(s, 1e-9));
    }
  }
  CHECK(members > 0);
  CHECK(nulls > 0);
}

TEST_CASE("annulus clipping keeps vertices that sit on the hole boundary") {
  // Found by the randomized update test: the second pass re-clipped a set
  // whose vertices the first pass had placed on the hole circle.
  const ConvexPolygon q = ConvexPolygon::hull_of(std::vector<Point2>{{15.831731958905108, -5.5703324322277723},
                                                                     {16.164164476557669, -5.5703324322277723},
                                                                     {16.164164476557669, -5.2485134441639945},
                                                                     {15.831731958905108, -5.2718180679518953}});
  const ConvexPolygon m = ConvexPolygon::box({15.150068745840493, 15.518827814111843},
                                             {6.4657869406794894, 6.8345460089508405});
  const double r = 12.225539830977588;
  const auto c = setloc::geom::clip_to_annulus(q, m, {r - 0.1, r + 0.1});
  REQUIRE(c);
  CHECK(c->contains({16.13, -5.45}));
}

TEST_CASE("annulus clipping removes the hole") {
  const ConvexPolygon q = ConvexPolygon::box({-1, 1}, {-1, 1});
  const auto c = setloc::geom::clip_to_annulus(q, ConvexPolygon::point({0, -10}), {9.9, 10.1});
  REQUIRE(c);
  CHECK(c->y_range().lo >= -1.0 - 1e-12);
  CHECK(c->y_range().lo <= -0.1 + 1e-9);
  CHECK(c->y_range().hi <= 0.15);
  CHECK(c->area() < 0.6);
}

TEST_CASE("yaw increment bounds cover every in-bound draw") {
  setloc::kin::RobotModel m;
  m.wheelbase = 2.1;
  m.dt = 0.5;
  m.eps_v = 0.1;
  m.eps_delta = deg(0.5);
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const Control u{setloc::uniform(rng, -1.5, 1.5), setloc::uniform(rng, -deg(40), deg(40))};
    const Interval b = setloc::kin::yaw_increment_bounds(u, m);
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k < 400; ++k) {
      const double v = u.v + setloc::uniform_symmetric(rng, m.eps_v);
      const double d = u.delta + setloc::uniform_symmetric(rng, m.eps_delta);
      const double yaw = v * m.dt * std::sin(d) / m.wheelbase;
      REQUIRE(b.contains(yaw, 1e-12));
      lo = std::min(lo, yaw);
      hi = std::max(hi, yaw);
    }
    CHECK(b.width() <= (hi - lo) * 1.2 + 1e-6);
    CHECK(std::max(std::abs(b.lo), std::abs(b.hi)) <= setloc::kin::max_yaw_increment(u, m) + 1e-12);
  }
}
