#pragma once

#include <optional>

#include "lalg/riemann.hpp"

namespace lalg {

/// Almost contact structure (F, xi, eta) on an odd-rank algebroid, optionally
/// carrying a compatible metric. `convention` records which d-normalization
/// the structure's defining relations assume (see DConvention).
struct AlmostContactStructure {
  AlgebroidPtr owner;
  TensorField F;    // (1,1)
  TensorField xi;   // section
  TensorField eta;  // one-form
  std::optional<BundleMetric> metric;
  DConvention convention = DConvention::Plain;

  int m() const { return (owner->rank() - 1) / 2; }
};

struct NormalityTensors {
  TensorField N1;  // N_F + 2 d eta (x) xi, vector-valued 2-form
  TensorField N2;  // 2-form
  TensorField N3;  // (1,1)
  TensorField N4;  // one-form
};

/// Defining identities F^2 = -I + eta (x) xi, eta(xi) = 1, plus the derived
/// ones (F(xi)=0, F^3+F=0, eta o F = 0, numeric rank F = 2m).
Report check_almost_contact(const AlmostContactStructure& acs, const SampleGrid& grid);

/// Compatibility of the metric: g(Fs,Ft) = g(s,t) - eta(s)eta(t), eta = g(.,xi),
/// +-F + eta (x) xi orthogonal, g(Fs,t) + g(s,Ft) = 0.
Report check_compatibility(const AlmostContactStructure& acs, const SampleGrid& grid);

/// Averaging construction of a compatible metric from an arbitrary seed metric.
BundleMetric build_compatible_metric(const AlmostContactStructure& acs, const BundleMetric& seed);

/// Omega(s1, s2) = g(s1, F(s2)).
TensorField fundamental_form(const AlmostContactStructure& acs);

/// eta ^ (d eta)^m != 0, tested through the wedge machinery and independently
/// through the frame-component permutation scalar; both routes must agree.
Report contact_test(const AlgebroidPtr& E, const TensorField& eta, const SampleGrid& grid,
                    DConvention convention = DConvention::Plain);

struct ReebResult {
  std::vector<Eigen::VectorXd> values;  // solved xi per grid point
  Report report;
};

/// Pointwise solve of eta(xi) = 1, iota_xi d eta = 0.
ReebResult reeb_section(const AlgebroidPtr& E, const TensorField& eta, const SampleGrid& grid);

struct PointStructure {
  Eigen::MatrixXd F;
  Eigen::VectorXd xi;
  Eigen::VectorXd eta;
};

struct InducedStructure {
  std::vector<PointStructure> values;  // per grid point
  Report report;
};

/// Almost contact structure induced by (eta, Omega, h) with eta ^ Omega^m != 0:
/// kernel direction of Omega, metric-dual eta*, and F from the polar
/// decomposition on the orthogonal complement of xi.
InducedStructure induce_from_pair(const AlgebroidPtr& E, const TensorField& eta,
                                  const TensorField& Omega, const BundleMetric& h,
                                  const SampleGrid& grid);

/// Brute-force permutation-formula kernel direction (small ranks only);
/// independent oracle for induce_from_pair.
Eigen::VectorXd kernel_direction_oracle(const Eigen::MatrixXd& omega,
                                        const Eigen::MatrixXd& h);

NormalityTensors normality_tensors(const AlmostContactStructure& acs);

struct ClassificationFlags {
  bool almost_contact = false;
  bool compatible = false;
  bool contact_riemannian = false;
  bool normal = false;
  bool K_contact = false;
  bool sasakian = false;
  bool almost_kenmotsu = false;
  bool kenmotsu = false;
};

struct Classification {
  ClassificationFlags flags;
  Report report;
  DConvention convention = DConvention::Plain;
};

/// Ladder of structure flags; residual predicates follow the covariant
/// characterizations (nabla xi = -F, the nabla F identities, d Omega = 2 eta ^ Omega).
Classification classify(const AlmostContactStructure& acs, const SampleGrid& grid,
                        double tol = 1e-8);

/// Identity suite gated by the classification flags (see report notes for the
/// gates): the covariant master formula, the N-tensor identities, co-closedness
/// of eta on K-contact structures, the Kenmotsu identities, and the
/// equivalence of the two covariant normality characterizations with N1 = 0.
Report check_identities(const AlmostContactStructure& acs, const Connection& conn,
                        const SampleGrid& grid, const Classification& cls,
                        unsigned seed = 2024, int triples = 20);

struct MorphismResult {
  bool is_contact = false;
  bool strict = false;
  std::vector<double> f_values;  // per grid point
  Report report;
};

/// mu* eta2 = f eta1 for nowhere-zero f, cross-checked against mu(ker eta1)
/// being contained in ker eta2.
MorphismResult contact_morphism_check(const AlgebroidPtr& E1, const AlgebroidPtr& E2,
                                      const std::vector<std::vector<Expr>>& mu,
                                      const TensorField& eta1, const TensorField& eta2,
                                      const SampleGrid& grid);

struct VolumeIdentityResult {
  Report report;
  double ratio = 0.0;  // eta ^ (d eta)^m / dV at the first grid point
};

/// Constancy of the top-form ratio eta ^ (d eta)^m / dV_g over the grid; for
/// half-convention structures the constant must equal 2^m m!.
VolumeIdentityResult volume_identity_check(const AlmostContactStructure& acs,
                                           const SampleGrid& grid);

/// Multilinear evaluation of a p-form (canonical numeric components) on p vectors.
double form_value(std::span<const double> canonical, int m, int degree,
                  const std::vector<Eigen::VectorXd>& args);

}  // namespace lalg
