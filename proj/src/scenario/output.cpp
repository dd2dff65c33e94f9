#include <cstdio>
#include <ostream>

#include "setloc/scenario.hpp"

namespace setloc::scn {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_vertices(std::ostream& os, const ConvexPolygon& p) {
  os << '[';
  bool first = true;
  for (const Point2& v : p.vertices()) {
    os << (first ? "" : ",") << '[' << format_double(v.x) << ',' << format_double(v.y) << ']';
    first = false;
  }
  os << ']';
}

void polygon_line(std::ostream& os, int k, const char* estimator, const char* object, int id, const ConvexPolygon& p) {
  os << "{\"k\":" << k << ",\"estimator\":\"" << estimator << "\",\"object\":\"" << object << "\",\"id\":" << id
     << ",\"vertices\":";
  write_vertices(os, p);
  os << "}\n";
}

void arc_line(std::ostream& os, int k, const char* estimator, const char* object, int id, const AngleInterval& a) {
  os << "{\"k\":" << k << ",\"estimator\":\"" << estimator << "\",\"object\":\"" << object << "\",\"id\":" << id
     << ",\"center\":" << format_double(a.center()) << ",\"half_width\":" << format_double(a.half_width()) << "}\n";
}

}  // namespace

void write_metrics_csv(std::ostream& os, const RunRecord& record) {
  os << "estimator,k,m1,m2,body_in,heading_in,markers_in,sensors_in,body_area,heading_width\n";
  for (const MetricRow& r : record.rows) {
    const StepMetrics& m = r.metrics;
    os << r.estimator << ',' << r.k << ',' << format_double(m.m1) << ',' << format_double(m.m2) << ','
       << m.body_in << ',' << m.heading_in << ',' << m.markers_in << ',' << m.sensors_in << ','
       << format_double(m.body_area) << ',' << format_double(m.heading_width) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const RunRecord& record) {
  os << "estimator,k,wall_ms\n";
  for (const auto& [k, ms] : record.set_wall_ms) os << "set," << k << ',' << format_double(ms) << '\n';
  for (const auto& [k, ms] : record.fastslam_wall_ms) os << "fastslam," << k << ',' << format_double(ms) << '\n';
}

StepObserver geometry_writer(std::ostream& os) {
  return [&os](const StepView& v) {
    const Truth& t = *v.truth;
    os << "{\"k\":" << v.k << ",\"estimator\":\"truth\",\"object\":\"pose\",\"id\":0,\"x\":" << format_double(t.pose.x)
       << ",\"y\":" << format_double(t.pose.y) << ",\"theta\":" << format_double(t.pose.theta) << "}\n";
    polygon_line(os, v.k, "truth", "body", 0, t.body);
    if (const est::EstimatorState* s = v.set_state) {
      for (std::size_t j = 0; j < s->markers.size(); ++j) polygon_line(os, v.k, "set", "marker", static_cast<int>(j), s->markers[j]);
      for (std::size_t i = 0; i < s->sensor_xy.size(); ++i) {
        polygon_line(os, v.k, "set", "sensor_xy", static_cast<int>(i), s->sensor_xy[i]);
        arc_line(os, v.k, "set", "sensor_theta", static_cast<int>(i), s->sensor_theta[i]);
      }
      polygon_line(os, v.k, "set", "body", 0, s->body);
      arc_line(os, v.k, "set", "heading", 0, s->heading);
    }
    if (const pf::ParticleSet* ps = v.particles) {
      polygon_line(os, v.k, "fastslam", "body", 0, pf::estimate_body_particles(*ps));
    }
  };
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "value,seed,estimator,mean_m1,std_m1,mean_m2,std_m2,status\n";
  for (const SweepRow& r : rows) {
    os << format_double(r.value) << ',' << r.seed << ',' << r.estimator << ',' << format_double(r.summary.mean_m1)
       << ',' << format_double(r.summary.std_m1) << ',' << format_double(r.summary.mean_m2) << ','
       << format_double(r.summary.std_m2) << ',' << r.status << '\n';
  }
}

}  // namespace setloc::scn
