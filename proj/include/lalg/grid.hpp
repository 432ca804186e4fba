#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lalg {

/// A point in a fixed coordinate chart.
struct Point {
  std::vector<double> coords;

  Point() = default;
  explicit Point(std::vector<double> c) : coords(std::move(c)) {}
  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
};

/// A coordinate chart: variable names plus the box the samples live in.
struct Chart {
  std::vector<std::string> variables;
  std::vector<std::pair<double, double>> box;  // per-variable [lo, hi]

  std::size_t dim() const { return variables.size(); }
};

/// Evaluation points plus the tolerances quantified claims are tested against.
struct SampleGrid {
  std::vector<Point> points;
  double tol_eq = 1e-9;
  double tol_nonzero = 1e-9;

  SampleGrid() = default;
  SampleGrid(std::vector<Point> pts, double eq = 1e-9, double nonzero = 1e-9)
      : points(std::move(pts)), tol_eq(eq), tol_nonzero(nonzero) {
    if (points.empty()) throw std::invalid_argument("SampleGrid: empty point set");
  }
  std::size_t size() const { return points.size(); }
};

/// Deterministic low-discrepancy (Halton) points inside the chart box.
/// The same (box, count, seed) always yields bit-identical points.
std::vector<Point> halton_points(const std::vector<std::pair<double, double>>& box,
                                 std::size_t count, unsigned seed);

SampleGrid make_grid(const Chart& chart, std::size_t count, unsigned seed,
                     double tol_eq = 1e-9, double tol_nonzero = 1e-9);

}  // namespace lalg
