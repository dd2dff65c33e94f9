#include "setloc/fastslam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "setloc/sampling.hpp"

namespace setloc::pf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Cov = std::array<double, 3>;  // xx, xy, yy

// Variance of a uniform sample over the bounding box of a set.
Cov box_covariance(const ConvexPolygon& p) {
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x, lo_y = lo_x, hi_y = -lo_x;
  for (const Point2& v : p.vertices()) {
    lo_x = std::min(lo_x, v.x);
    hi_x = std::max(hi_x, v.x);
    lo_y = std::min(lo_y, v.y);
    hi_y = std::max(hi_y, v.y);
  }
  return {(hi_x - lo_x) * (hi_x - lo_x) / 12.0, 0.0, (hi_y - lo_y) * (hi_y - lo_y) / 12.0};
}

// One scalar measurement row: predicted value, gradient wrt the marker, noise
// sigma and truncation bound.
struct Row {
  double residual;
  Point2 grad;
  double sigma;
  double bound;
};

struct Innovation {
  std::array<Row, 2> rows;
  int n = 0;
};

struct SensorSpread {
  Cov xy{0.0, 0.0, 0.0};
  double theta = 0.0;
};

double quad(const Cov& c, Point2 a, Point2 b);

// Measurement noise plus the sensor-pose spread, as an effective sigma.
Innovation innovation(const sense::Measurement& m, Point2 marker, Point2 sensor_xy, double sensor_theta,
                      const sense::SensorModel& model, double fraction, const SensorSpread& spread) {
  Innovation in;
  const Point2 d = marker - sensor_xy;
  const double r2 = std::max(geom::dot(d, d), 1e-12);
  const double r = std::sqrt(r2);
  in.rows[in.n++] = {geom::wrap_angle(m.alpha - (std::atan2(d.y, d.x) - sensor_theta)), Point2{-d.y / r2, d.x / r2},
                     model.eps_wa * fraction, model.eps_wa};
  if (m.r) in.rows[in.n++] = {*m.r - r, Point2{d.x / r, d.y / r}, model.eps_wr * fraction, model.eps_wr};
  for (int a = 0; a < in.n; ++a) {
    Row& row = in.rows[a];
    double var = row.sigma * row.sigma + quad(spread.xy, row.grad, row.grad);
    if (a == 0) var += spread.theta;
    row.sigma = std::sqrt(var);
  }
  return in;
}

double quad(const Cov& c, Point2 a, Point2 b) {
  return a.x * (c[0] * b.x + c[1] * b.y) + a.y * (c[1] * b.x + c[2] * b.y);
}

// Truncated Gaussian log-likelihood of the innovation, S = H P H^T + R. Each
// component is truncated where the measurement-noise-only model would be
// truncated, scaled by the inflated sigma; with P = 0 this is exactly
// bound * sigma_fraction truncated at the bound.
double log_likelihood(const Innovation& in, const Cov& P, double fraction) {
  double S[2][2] = {{0, 0}, {0, 0}};
  for (int a = 0; a < in.n; ++a) {
    for (int b = 0; b < in.n; ++b) S[a][b] = quad(P, in.rows[a].grad, in.rows[b].grad);
    S[a][a] += in.rows[a].sigma * in.rows[a].sigma;
  }
  constexpr double kExact = 1e-18;
  double ll = 0.0;
  for (int a = 0; a < in.n; ++a) {
    const double e = std::abs(in.rows[a].residual);
    if (S[a][a] <= kExact) {
      if (e > 1e-9) return kNegInf;
      continue;
    }
    if (e > std::sqrt(S[a][a]) / fraction) return kNegInf;
  }
  if (in.n == 1) {
    if (S[0][0] > kExact) ll = -0.5 * in.rows[0].residual * in.rows[0].residual / S[0][0] - 0.5 * std::log(S[0][0]);
    return ll;
  }
  const double det = S[0][0] * S[1][1] - S[0][1] * S[1][0];
  if (det <= kExact) return ll;
  const double r0 = in.rows[0].residual;
  const double r1 = in.rows[1].residual;
  const double m2 = (S[1][1] * r0 * r0 - 2.0 * S[0][1] * r0 * r1 + S[0][0] * r1 * r1) / det;
  return -0.5 * m2 - 0.5 * std::log(det);
}

// Sequential scalar EKF updates of one marker.
void ekf_update(Innovation in, Point2& x, Cov& P) {
  for (int a = 0; a < in.n; ++a) {
    const Row& row = in.rows[a];
    const double s = quad(P, row.grad, row.grad) + row.sigma * row.sigma;
    if (s <= 1e-18) continue;
    const Point2 pg{P[0] * row.grad.x + P[1] * row.grad.y, P[1] * row.grad.x + P[2] * row.grad.y};
    const Point2 k{pg.x / s, pg.y / s};
    // Later rows reuse the first linearization; residual shifts by H * dx.
    const Point2 dx{k.x * row.residual, k.y * row.residual};
    x = x + dx;
    P = {P[0] - k.x * pg.x, P[1] - k.x * pg.y, P[2] - k.y * pg.y};
    for (int b = a + 1; b < in.n; ++b) {
      in.rows[b].residual -= geom::dot(in.rows[b].grad, dx);
    }
  }
}

}  // namespace

ParticleSet init_particles(const est::EstimatorState& initial, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("need at least one particle");
  ParticleSet ps;
  ps.rng.seed(seed);
  ps.particles.resize(static_cast<std::size_t>(count));
  for (Particle& p : ps.particles) {
    for (const ConvexPolygon& s : initial.sensor_xy) p.sensor_xy.push_back(sample_uniform(s, ps.rng));
    for (const AngleInterval& a : initial.sensor_theta) p.sensor_theta.push_back(sample_uniform(a, ps.rng));
    for (const ConvexPolygon& m : initial.markers) {
      p.markers.push_back(sample_uniform(m, ps.rng));
      p.marker_cov.push_back(box_covariance(m));
    }
    p.weight = 1.0 / count;
  }
  for (std::size_t i = 0; i < initial.sensor_xy.size(); ++i) {
    const Cov c = box_covariance(initial.sensor_xy[i]);
    const double w = initial.sensor_theta[i].width();
    ps.sensor_spread.push_back({c[0], c[1], c[2], w * w / 12.0});
  }
  return ps;
}

double particle_heading(const Particle& p, const est::RigidBodySpec& spec) {
  const std::size_t n = p.markers.size();
  if (n < 2) return 0.0;
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Point2 d = p.markers[j] - p.markers[i];
      const double h = std::atan2(d.y, d.x) - spec.bearing(i, j);
      sx += std::cos(h);
      sy += std::sin(h);
    }
  }
  return std::atan2(sy, sx);
}

void predict(ParticleSet& ps, const kin::Control& u, const est::Models& models) {
  const kin::RobotModel& robot = models.robot;
  for (Particle& p : ps.particles) {
    if (models.mode == est::MotionMode::Omnidirectional) {
      const double reach = models.v_max * robot.dt;
      for (std::size_t j = 0; j < p.markers.size(); ++j) {
        p.markers[j] = p.markers[j] + Point2{uniform_symmetric(ps.rng, reach), uniform_symmetric(ps.rng, reach)};
        p.marker_cov[j][0] += reach * reach / 3.0;
        p.marker_cov[j][2] += reach * reach / 3.0;
      }
      continue;
    }
    const double heading = particle_heading(p, models.rigid);
    kin::MarkerNoise noise;
    noise.w_v = uniform_symmetric(ps.rng, robot.eps_v);
    noise.w_delta = uniform_symmetric(ps.rng, robot.eps_delta);
    for (std::size_t j = 0; j < p.markers.size(); ++j) {
      noise.w_f = {uniform_symmetric(ps.rng, robot.eps_f), uniform_symmetric(ps.rng, robot.eps_f)};
      p.markers[j] = kin::marker_step(p.markers[j], u, noise, heading, models.offsets[j], robot);
      // Variance of the uniform noise, pushed through the step to first order.
      const double travel = robot.dt * robot.eps_v;
      const double swing = models.offsets[j].delta_l * robot.dt * (std::abs(u.v) + robot.eps_v) *
                           std::sin(std::min(robot.eps_delta, geom::kPi / 2)) / robot.wheelbase;
      const double q = (travel * travel + swing * swing + 2.0 * robot.eps_f * robot.eps_f) / 3.0;
      p.marker_cov[j][0] += q;
      p.marker_cov[j][2] += q;
    }
  }
}

void weight_update(ParticleSet& ps, const est::Batches& batches, const est::Models& models,
                   const FastSlamOptions& options) {
  const double fraction = options.sigma_fraction;
  std::vector<SensorSpread> spread;
  if (options.landmark_update) {
    for (const auto& v : ps.sensor_spread) spread.push_back({{v[0], v[1], v[2]}, v[3]});
  }
  const Cov zero{0.0, 0.0, 0.0};
  spread.resize(ps.particles.front().sensor_xy.size());
  std::vector<double> logw(ps.particles.size(), 0.0);
  for (std::size_t s = 0; s < ps.particles.size(); ++s) {
    Particle& p = ps.particles[s];
    double total = std::log(p.weight);
    for (std::size_t i = 0; i < batches.size() && total > kNegInf; ++i) {
      const sense::SensorModel& model = models.sensors.at(i);
      for (const sense::Measurement& m : batches[i]) {
        double best = kNegInf;
        std::size_t best_j = 0;
        Innovation best_in;
        for (std::size_t j = 0; j < p.markers.size(); ++j) {
          const Innovation in = innovation(m, p.markers[j], p.sensor_xy[i], p.sensor_theta[i], model, fraction, spread[i]);
          const double ll = log_likelihood(in, options.landmark_update ? p.marker_cov[j] : zero, fraction);
          if (ll > best) {
            best = ll;
            best_j = j;
            best_in = in;
          }
        }
        total += best;
        if (total == kNegInf) break;
        if (options.landmark_update) ekf_update(best_in, p.markers[best_j], p.marker_cov[best_j]);
      }
    }
    logw[s] = total;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  if (top == kNegInf) {
    ++ps.degenerate_events;
    for (Particle& p : ps.particles) p.weight = 1.0 / static_cast<double>(ps.particles.size());
    return;
  }
  double sum = 0.0;
  for (std::size_t s = 0; s < logw.size(); ++s) {
    ps.particles[s].weight = std::exp(logw[s] - top);
    sum += ps.particles[s].weight;
  }
  for (Particle& p : ps.particles) p.weight /= sum;
}

void resample(ParticleSet& ps) {
  const std::size_t n = ps.particles.size();
  std::vector<Particle> out;
  out.reserve(n);
  const double step = 1.0 / static_cast<double>(n);
  double target = uniform(ps.rng, 0.0, step);
  double cumulative = ps.particles[0].weight;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (target > cumulative && i + 1 < n) cumulative += ps.particles[++i].weight;
    out.push_back(ps.particles[i]);
    out.back().weight = step;
    target += step;
  }
  ps.particles = std::move(out);
}

ConvexPolygon estimate_body_particles(const ParticleSet& ps, double body_radius) {
  if (ps.particles.empty()) throw std::invalid_argument("empty particle set");
  std::vector<Point2> pts;
  for (const Particle& p : ps.particles) pts.insert(pts.end(), p.markers.begin(), p.markers.end());
  const ConvexPolygon hull = ConvexPolygon::hull_of(pts);
  if (body_radius <= 0.0) return hull;
  return geom::minkowski_sum(hull, geom::ball_outer_polygon(body_radius, geom::Norm::L2));
}

AngleInterval estimate_heading_particles(const ParticleSet& ps, const est::RigidBodySpec& spec) {
  if (ps.particles.empty()) throw std::invalid_argument("empty particle set");
  if (spec.size() < 2) return AngleInterval::full();
  std::vector<AngleInterval> headings;
  headings.reserve(ps.particles.size());
  for (const Particle& p : ps.particles) headings.push_back(AngleInterval::point(particle_heading(p, spec)));
  return geom::enclose_angles(headings);
}

}  // namespace setloc::pf
