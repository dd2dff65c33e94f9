#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "setloc/estimator.hpp"

namespace setloc::pf {

using geom::AngleInterval;
using geom::ConvexPolygon;
using geom::Point2;

struct Particle {
  std::vector<Point2> sensor_xy;
  std::vector<double> sensor_theta;
  std::vector<Point2> markers;
  // Per-marker Gaussian covariance (xx, xy, yy), FastSLAM-style.
  std::vector<std::array<double, 3>> marker_cov;
  double weight = 0.0;
};

struct FastSlamOptions {
  int particles = 100;
  double sigma_fraction = 1.0 / 3.0;  // sigma = bound * sigma_fraction
  // Per-particle EKF refinement of marker positions. Off gives the plain
  // weight-and-resample filter, which has no way to correct its samples.
  bool landmark_update = true;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::mt19937_64 rng;
  // Sensor pose spread of the initial sampling (xx, xy, yy, theta^2); sensor
  // poses are never refined, so this stays in every innovation.
  std::vector<std::array<double, 4>> sensor_spread;
  int degenerate_events = 0;  // weight updates where every weight vanished
};

/// Uniform samples from the initial sets.
ParticleSet init_particles(const est::EstimatorState& initial, int count, std::uint64_t seed);

/// Moves every particle's markers with independently drawn in-bound noise.
void predict(ParticleSet& ps, const kin::Control& u, const est::Models& models);

/// Multiplies weights by truncated-Gaussian likelihoods of the innovation
/// (sigma^2 = (bound * sigma_fraction)^2 + marker variance along the
/// measurement, truncated at bound / sigma_fraction sigmas) with
/// maximum-likelihood association, then refines each associated marker with
/// an EKF step and normalizes. All-zero weights reset to uniform.
void weight_update(ParticleSet& ps, const est::Batches& batches, const est::Models& models,
                   const FastSlamOptions& options);

/// Systematic resampling; weights become uniform.
void resample(ParticleSet& ps);

/// Heading implied by one particle's marker layout.
double particle_heading(const Particle& p, const est::RigidBodySpec& spec);

ConvexPolygon estimate_body_particles(const ParticleSet& ps, double body_radius = 0.0);
AngleInterval estimate_heading_particles(const ParticleSet& ps, const est::RigidBodySpec& spec);

}  // namespace setloc::pf
