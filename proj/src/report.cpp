#include "lalg/report.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#ifdef LALG_HAVE_OPENMP
#include <omp.h>
#endif

namespace lalg {

bool Report::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

bool Report::has(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return true;
  return false;
}

const CheckResult& Report::entry(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("Report: no entry named '" + name + "'");
}

void Report::print(std::ostream& os) const {
  for (const auto& e : entries) {
    os << (e.pass ? "[ ok ] " : "[FAIL] ") << std::left << std::setw(44) << e.name;
    os << std::scientific << std::setprecision(3);
    if (e.mode == CheckResult::Mode::MaxBelow)
      os << " max " << e.value << " < " << e.threshold;
    else
      os << " min " << e.value << " > " << e.threshold;
    if (!e.worst.coords.empty()) {
      os << "  worst (";
      for (std::size_t i = 0; i < e.worst.coords.size(); ++i)
        os << (i ? ", " : "") << std::setprecision(4) << e.worst.coords[i];
      os << ")";
    }
    if (!e.note.empty()) os << "  [" << e.note << "]";
    os << "\n";
  }
  os.flags(std::ios::fmtflags());
}

namespace {
std::atomic<bool> g_parallel{true};
}

void set_parallel_scan(bool enabled) { g_parallel.store(enabled); }
bool parallel_scan_enabled() { return g_parallel.load(); }

ScanResult scan_grid_serial(const SampleGrid& grid, const PointKernel& kernel) {
  ScanResult r;
  r.max_abs = -1.0;
  r.min_abs = -1.0;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    double v = std::fabs(kernel(grid.points[i]));
    if (v > r.max_abs) {
      r.max_abs = v;
      r.worst_index = i;
    }
    if (r.min_abs < 0.0 || v < r.min_abs) {
      r.min_abs = v;
      r.min_index = i;
    }
  }
  return r;
}

#ifdef LALG_HAVE_OPENMP

ScanResult scan_grid(const SampleGrid& grid, const PointKernel& kernel) {
  if (!g_parallel.load()) return scan_grid_serial(grid, kernel);
  const long n = long(grid.points.size());
  std::vector<double> values(static_cast<std::size_t>(n));
  std::string error_message;
  long error_index = -1;
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    try {
      values[static_cast<std::size_t>(i)] = std::fabs(kernel(grid.points[static_cast<std::size_t>(i)]));
    } catch (const std::exception& ex) {
#pragma omp critical
      {
        if (error_index < 0 || i < error_index) {
          error_index = i;
          error_message = ex.what();
        }
      }
    }
  }
  if (error_index >= 0)
    throw std::runtime_error("grid scan failed at point " + std::to_string(error_index) + ": " +
                             error_message);
  // Deterministic reduction, independent of the parallel evaluation order.
  ScanResult r;
  r.max_abs = -1.0;
  r.min_abs = -1.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > r.max_abs) {
      r.max_abs = values[i];
      r.worst_index = i;
    }
    if (r.min_abs < 0.0 || values[i] < r.min_abs) {
      r.min_abs = values[i];
      r.min_index = i;
    }
  }
  return r;
}

#else

ScanResult scan_grid(const SampleGrid& grid, const PointKernel& kernel) {
  return scan_grid_serial(grid, kernel);
}

#endif

CheckResult check_max(const std::string& name, const SampleGrid& grid,
                      const PointKernel& residual, double threshold) {
  ScanResult s = scan_grid(grid, residual);
  CheckResult c;
  c.name = name;
  c.value = s.max_abs;
  c.threshold = threshold;
  c.mode = CheckResult::Mode::MaxBelow;
  c.pass = s.max_abs < threshold;
  c.worst = grid.points[s.worst_index];
  return c;
}

CheckResult check_nonzero(const std::string& name, const SampleGrid& grid,
                          const PointKernel& value, double threshold) {
  ScanResult s = scan_grid(grid, value);
  CheckResult c;
  c.name = name;
  c.value = s.min_abs;
  c.threshold = threshold;
  c.mode = CheckResult::Mode::MinAbove;
  c.pass = s.min_abs > threshold;
  c.worst = grid.points[s.min_index];
  return c;
}

CheckResult skipped(const std::string& name, const std::string& why) {
  CheckResult c;
  c.name = name;
  c.pass = true;
  c.note = "skipped: " + why;
  return c;
}

}  // namespace lalg
