#include "setloc/correspondence.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "setloc/errors.hpp"

namespace setloc::assoc {

std::size_t CandidateMatrix::row_count(std::size_t q) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < cols_; ++j) n += (*this)(q, j) ? 1 : 0;
  return n;
}

CandidateMatrix build_candidate_matrix(std::span<const sense::Measurement> measurements,
                                       std::span<const geom::ConvexPolygon> predicted_markers,
                                       const geom::ConvexPolygon& predicted_sensor_xy,
                                       const geom::AngleInterval& predicted_sensor_theta,
                                       const sense::SensorModel& model, int sensor_id) {
  if (measurements.size() > predicted_markers.size()) {
    throw InconsistentBatch(sensor_id, static_cast<int>(predicted_markers.size()),
                            "more measurements than markers");
  }
  CandidateMatrix c(sensor_id, measurements.size(), predicted_markers.size());
  for (std::size_t q = 0; q < measurements.size(); ++q) {
    std::optional<geom::ConvexPolygon> reach;
    try {
      reach = geom::minkowski_sum(
          predicted_sensor_xy,
          sense::feasible_marker_region(measurements[q].alpha, measurements[q].r, model,
                                        predicted_sensor_theta.center(),
                                        predicted_sensor_theta.half_width()));
    } catch (const SectorTooWide&) {
      // The heading is too uncertain to localise this reading; any marker fits.
    }
    for (std::size_t j = 0; j < predicted_markers.size(); ++j) {
      c.set(q, j, !reach || geom::intersect(predicted_markers[j], *reach).has_value());
    }
    if (c.row_count(q) == 0) {
      throw InconsistentBatch(sensor_id, static_cast<int>(q), "measurement fits no marker");
    }
  }
  return c;
}

std::vector<Assignment> enumerate_assignments(const CandidateMatrix& c, std::size_t cap) {
  if (cap < 1) throw std::invalid_argument("assignment cap must be >= 1");
  std::vector<Assignment> out;
  const std::size_t rows = c.rows();
  if (rows == 0) {
    out.emplace_back();
    return out;
  }
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return c.row_count(a) < c.row_count(b); });

  Assignment current(rows, -1);
  std::vector<char> used(c.cols(), 0);
  auto dfs = [&](auto&& self, std::size_t depth) -> void {
    if (depth == rows) {
      if (out.size() == cap) throw CapExceeded(cap);
      out.push_back(current);
      return;
    }
    const std::size_t q = order[depth];
    for (std::size_t j = 0; j < c.cols(); ++j) {
      if (!c(q, j) || used[j]) continue;
      used[j] = 1;
      current[q] = static_cast<int>(j);
      self(self, depth + 1);
      used[j] = 0;
    }
  };
  dfs(dfs, 0);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> markers_with_certain_measurement(std::span<const Assignment> assignments, std::size_t n) {
  if (assignments.empty()) throw std::invalid_argument("no assignments");
  std::vector<int> certain;
  for (std::size_t j = 0; j < n; ++j) {
    const bool everywhere = std::all_of(assignments.begin(), assignments.end(), [&](const Assignment& a) {
      return std::find(a.begin(), a.end(), static_cast<int>(j)) != a.end();
    });
    if (everywhere) certain.push_back(static_cast<int>(j));
  }
  return certain;
}

}  // namespace setloc::assoc
