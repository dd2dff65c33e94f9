#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "setloc/geom2d.hpp"
#include "setloc/sensing.hpp"

namespace setloc::assoc {

/// Feasibility of measurement q (row) against marker j (column).
class CandidateMatrix {
 public:
  CandidateMatrix() = default;
  CandidateMatrix(int sensor_id, std::size_t rows, std::size_t cols)
      : sensor_id_(sensor_id), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

  int sensor_id() const { return sensor_id_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool operator()(std::size_t q, std::size_t j) const { return entries_[q * cols_ + j] != 0; }
  void set(std::size_t q, std::size_t j, bool value) { entries_[q * cols_ + j] = value ? 1 : 0; }
  std::size_t row_count(std::size_t q) const;

 private:
  int sensor_id_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<unsigned char> entries_;
};

/// Marker index for each measurement row; injective.
using Assignment = std::vector<int>;

inline constexpr std::size_t kDefaultAssignmentCap = 1000;

/// Throws InconsistentBatch when a row has no feasible marker.
CandidateMatrix build_candidate_matrix(std::span<const sense::Measurement> measurements,
                                       std::span<const geom::ConvexPolygon> predicted_markers,
                                       const geom::ConvexPolygon& predicted_sensor_xy,
                                       const geom::AngleInterval& predicted_sensor_theta,
                                       const sense::SensorModel& model, int sensor_id = 0);

/// Every injective selection of one true entry per row. Throws CapExceeded
/// when there are more than cap of them.
std::vector<Assignment> enumerate_assignments(const CandidateMatrix& c,
                                              std::size_t cap = kDefaultAssignmentCap);

/// Markers that receive a measurement under every assignment, ascending.
std::vector<int> markers_with_certain_measurement(std::span<const Assignment> assignments, std::size_t n);

}  // namespace setloc::assoc
