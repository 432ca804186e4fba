#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "lalg/contact.hpp"

namespace lalg {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A JSON description of an algebroid, an optional (almost) contact structure,
/// the sampling grid and the tolerances. Unknown keys are rejected.
struct Manifest {
  Chart chart;
  AlgebroidPtr algebroid;
  std::optional<AlmostContactStructure> structure;
  std::size_t grid_count = 50;
  unsigned seed = 1;
  std::string strategy = "halton";
  DConvention convention = DConvention::Plain;
  double tol_eq = 1e-9;
  double tol_nonzero = 1e-9;
  double tol_classify = 1e-8;

  SampleGrid grid() const;
};

Manifest parse_manifest(const nlohmann::ordered_json& j);
Manifest load_manifest(const std::string& path);

/// Metric file for the big-tangent command: base metric entries over x1..xn
/// plus the sampling boxes.
struct BigTangentSpec {
  int n = 0;
  std::vector<std::vector<Expr>> g;
  std::vector<std::pair<double, double>> box;  // 3n entries (x, y, p)
  double margin = 0.5;
};

BigTangentSpec load_bigtangent_spec(const std::string& path, int dim_override = 0);

nlohmann::ordered_json report_json(const Report& report);
nlohmann::ordered_json point_json(const Point& p);

}  // namespace lalg
