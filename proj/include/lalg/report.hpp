#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lalg/grid.hpp"

namespace lalg {

/// One verified identity: either a residual that must stay below threshold
/// (MaxBelow) or a quantity that must stay away from zero (MinAbove).
struct CheckResult {
  enum class Mode { MaxBelow, MinAbove };

  std::string name;
  double value = 0.0;  // max residual (MaxBelow) or min magnitude (MinAbove)
  double threshold = 0.0;
  Mode mode = Mode::MaxBelow;
  bool pass = false;
  Point worst;
  std::string note;
};

struct Report {
  std::vector<CheckResult> entries;

  bool all_pass() const;
  const CheckResult& entry(const std::string& name) const;
  bool has(const std::string& name) const;
  void print(std::ostream& os) const;
};

/// Result of scanning a scalar-valued kernel over a grid.
struct ScanResult {
  double max_abs = 0.0;
  std::size_t worst_index = 0;
  double min_abs = 0.0;
  std::size_t min_index = 0;
};

using PointKernel = std::function<double(const Point&)>;

/// Evaluates `kernel` at every grid point and reduces to max/min magnitude.
/// The OpenMP path and the serial reference below return identical results
/// (ties broken toward the smallest point index).
ScanResult scan_grid(const SampleGrid& grid, const PointKernel& kernel);
ScanResult scan_grid_serial(const SampleGrid& grid, const PointKernel& kernel);

/// Process-wide switch; scan_grid falls back to the serial path when false.
void set_parallel_scan(bool enabled);
bool parallel_scan_enabled();

/// Convenience builders used by every verification routine.
CheckResult check_max(const std::string& name, const SampleGrid& grid,
                      const PointKernel& residual, double threshold);
CheckResult check_nonzero(const std::string& name, const SampleGrid& grid,
                          const PointKernel& value, double threshold);
CheckResult skipped(const std::string& name, const std::string& why);

}  // namespace lalg
