#include <algorithm>
#include <set>
#include <vector>

#include "setloc/correspondence.hpp"
#include "setloc/errors.hpp"
#include "support.hpp"

using namespace setloc::assoc;
using setloc::geom::AngleInterval;
using setloc::geom::ConvexPolygon;
using setloc::geom::Interval;
using setloc::geom::Point2;
using setloc::sense::Measurement;
using setloc::sense::SensorModel;
using testsupport::deg;

namespace {

CandidateMatrix from_rows(const std::vector<std::vector<int>>& rows) {
  CandidateMatrix c(0, rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t q = 0; q < rows.size(); ++q) {
    for (std::size_t j = 0; j < rows[q].size(); ++j) c.set(q, j, rows[q][j] != 0);
  }
  return c;
}

// Every row -> column map, filtered to injective ones on true entries.
std::vector<Assignment> brute_force(const CandidateMatrix& c) {
  std::vector<Assignment> out;
  const std::size_t rows = c.rows(), cols = c.cols();
  std::size_t total = 1;
  for (std::size_t q = 0; q < rows; ++q) total *= cols;
  for (std::size_t code = 0; code < total; ++code) {
    Assignment a(rows);
    std::size_t rest = code;
    for (std::size_t q = 0; q < rows; ++q) {
      a[q] = static_cast<int>(rest % cols);
      rest /= cols;
    }
    bool ok = true;
    std::set<int> seen;
    for (std::size_t q = 0; q < rows && ok; ++q) ok = c(q, a[q]) && seen.insert(a[q]).second;
    if (ok) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ConvexPolygon box_at(double cx, double cy, double side) {
  return ConvexPolygon::box({cx - side / 2, cx + side / 2}, {cy - side / 2, cy + side / 2});
}

}  // namespace

TEST_CASE("worked example: two readings, four markers") {
  const CandidateMatrix c = from_rows({{0, 0, 1, 0}, {1, 0, 1, 1}});
  const auto a = enumerate_assignments(c);
  REQUIRE(a.size() == 2);
  CHECK(a[0] == Assignment{2, 0});
  CHECK(a[1] == Assignment{2, 3});
  CHECK(markers_with_certain_measurement(a, 4) == std::vector<int>{2});
}

TEST_CASE("candidate matrix from geometry reproduces the worked example") {
  SensorModel m;
  m.eps_wa = deg(1);
  m.eps_wr = 0.1;
  const std::vector<ConvexPolygon> markers{box_at(9.8, 2.3, 1), box_at(0, 20, 1), box_at(10, 0.8, 2),
                                           box_at(10.2, 1.5, 1)};
  const std::vector<Measurement> z{{0.0, 10.0, 0, 0}, {deg(10), 10.0, 0, 1}};
  const auto c = build_candidate_matrix(z, markers, ConvexPolygon::point({0, 0}), AngleInterval::point(0.0), m);
  REQUIRE(c.rows() == 2);
  REQUIRE(c.cols() == 4);
  const int expected[2][4] = {{0, 0, 1, 0}, {1, 0, 1, 1}};
  for (int q = 0; q < 2; ++q) {
    for (int j = 0; j < 4; ++j) CHECK(c(q, j) == (expected[q][j] != 0));
  }
}

TEST_CASE("enumeration examples") {
  CHECK(enumerate_assignments(from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})).size() == 1);
  const auto all = enumerate_assignments(from_rows({{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}));
  CHECK(all.size() == 24);
  CHECK(all == brute_force(from_rows({{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}})));
  // Zero rows: the empty assignment.
  CHECK(enumerate_assignments(CandidateMatrix(0, 0, 4)).size() == 1);
  // Pigeonhole: two rows on one column.
  CHECK(enumerate_assignments(from_rows({{1, 0}, {1, 0}})).empty());
}

TEST_CASE("enumeration matches brute force on every matrix up to 4x4") {
  for (std::size_t rows = 1; rows <= 4; ++rows) {
    for (std::size_t cols = 1; cols <= 4; ++cols) {
      const std::size_t cells = rows * cols;
      for (std::size_t bits = 0; bits < (std::size_t{1} << cells); ++bits) {
        CandidateMatrix c(0, rows, cols);
        for (std::size_t i = 0; i < cells; ++i) c.set(i / cols, i % cols, (bits >> i) & 1);
        REQUIRE(enumerate_assignments(c) == brute_force(c));
      }
    }
  }
}

TEST_CASE("assignment cap") {
  const auto c = from_rows({{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}});
  CHECK_THROWS_AS(enumerate_assignments(c, 23), setloc::CapExceeded);
  CHECK(enumerate_assignments(c, 24).size() == 24);
  CHECK_THROWS_AS(enumerate_assignments(c, 0), std::invalid_argument);
}

TEST_CASE("far-apart markers give one candidate") {
  SensorModel m;
  m.eps_wa = deg(0.5);
  m.eps_wr = 0.05;
  std::vector<ConvexPolygon> markers;
  for (int j = 0; j < 4; ++j) markers.push_back(box_at(5.0 * (j + 1), 3.0 * j, 0.2));
  const std::vector<Measurement> z{{std::atan2(6.0, 15.0), std::hypot(15.0, 6.0), 0, 0}};
  const auto c = build_candidate_matrix(z, markers, ConvexPolygon::point({0, 0}), AngleInterval::point(0.0), m);
  CHECK(c.row_count(0) == 1);
  CHECK(c(0, 2));
}

TEST_CASE("exact sensors on aligned batches give the identity") {
  SensorModel m;
  std::vector<ConvexPolygon> markers;
  std::vector<Measurement> z;
  for (int j = 0; j < 4; ++j) {
    const Point2 p = setloc::geom::polar(3.0 + j, 0.3 * j);
    markers.push_back(ConvexPolygon::point(p));
    z.push_back({0.3 * j, 3.0 + j, 0, j});
  }
  const auto c = build_candidate_matrix(z, markers, ConvexPolygon::point({0, 0}), AngleInterval::point(0.0), m);
  for (int q = 0; q < 4; ++q) {
    for (int j = 0; j < 4; ++j) CHECK(c(q, j) == (q == j));
  }
}

TEST_CASE("inconsistent batches") {
  SensorModel m;
  m.eps_wa = deg(1);
  m.eps_wr = 0.1;
  const std::vector<ConvexPolygon> markers{box_at(10, 0, 1)};
  SUBCASE("reading fits nothing") {
    const std::vector<Measurement> z{{deg(90), 10.0, 3, 0}};
    try {
      build_candidate_matrix(z, markers, ConvexPolygon::point({0, 0}), AngleInterval::point(0.0), m, 3);
      FAIL("expected InconsistentBatch");
    } catch (const setloc::InconsistentBatch& e) {
      CHECK(e.sensor() == 3);
      CHECK(e.row() == 0);
    }
  }
  SUBCASE("more readings than markers") {
    const std::vector<Measurement> z{{0.0, 10.0, 0, 0}, {0.0, 10.0, 0, 1}};
    CHECK_THROWS_AS(
        build_candidate_matrix(z, markers, ConvexPolygon::point({0, 0}), AngleInterval::point(0.0), m),
        setloc::InconsistentBatch);
  }
  SUBCASE("unknown heading keeps every marker") {
    const std::vector<Measurement> z{{deg(90), 10.0, 0, 0}};
    const auto c =
        build_candidate_matrix(z, markers, ConvexPolygon::point({0, 0}), AngleInterval::full(), m);
    CHECK(c(0, 0));
  }
}

TEST_CASE("certain markers") {
  const std::vector<Assignment> single{{3, 1}};
  CHECK(markers_with_certain_measurement(single, 4) == std::vector<int>{1, 3});
  const std::vector<Assignment> disjoint{{0, 1}, {2, 3}};
  CHECK(markers_with_certain_measurement(disjoint, 4).empty());
  CHECK_THROWS_AS(markers_with_certain_measurement(std::vector<Assignment>{}, 4), std::invalid_argument);
}
