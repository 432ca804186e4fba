#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "lalg/algebroid.hpp"

namespace lalg {

/// Riemannian bundle metric g_{ab}(x) on an algebroid.
struct BundleMetric {
  AlgebroidPtr owner;
  std::vector<std::vector<Expr>> comps;  // symmetric m x m

  const Expr& operator()(int a, int b) const { return comps[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }
  Eigen::MatrixXd eval(const Point& p) const;
  TensorField as_cov2() const;

  static BundleMetric euclidean(AlgebroidPtr E);
};

CheckResult check_positive_definite(const BundleMetric& g, const SampleGrid& grid);

/// Christoffel values Gamma^c_{ab} at one point.
struct Christoffels {
  int m = 0;
  std::vector<double> data;  // [a*m*m + b*m + c]

  double gamma(int a, int b, int c) const { return data[static_cast<std::size_t>((a * m + b) * m + c)]; }
};

/// Levi-Civita connection of a bundle metric, realized through the Koszul
/// formula. Christoffel values are obtained by solving the m x m metric
/// system pointwise rather than by symbolic inversion.
class Connection {
 public:
  Connection(AlgebroidPtr E, BundleMetric g);

  const AlgebroidPtr& algebroid() const { return E_; }
  const BundleMetric& metric() const { return g_; }

  Christoffels christoffels_at(const Point& p) const;

 private:
  AlgebroidPtr E_;
  BundleMetric g_;
  std::vector<std::vector<std::vector<Expr>>> dg_;  // rho_a(g_bc)
};

Connection levi_civita(AlgebroidPtr E, BundleMetric g);

CheckResult check_torsion_free(const Connection& conn, const SampleGrid& grid);
CheckResult check_metric_compatible(const Connection& conn, const SampleGrid& grid);

/// Covariant derivative of a fixed tensor field, evaluated pointwise along
/// frame directions (Leibniz extension of the connection to tensors).
class CovariantField {
 public:
  CovariantField(const Connection& conn, TensorField T);

  const TensorField& field() const { return T_; }

  // (nabla_{e_a} T) at p. Numeric containers depend on the variance of T.
  double function_at(const Christoffels& ch, const Point& p, int a) const;
  Eigen::VectorXd section_at(const Christoffels& ch, const Point& p, int a) const;
  Eigen::VectorXd one_form_at(const Christoffels& ch, const Point& p, int a) const;
  std::vector<double> form_at(const Christoffels& ch, const Point& p, int a) const;
  Eigen::MatrixXd endo_at(const Christoffels& ch, const Point& p, int a) const;
  Eigen::MatrixXd cov2_at(const Christoffels& ch, const Point& p, int a) const;

  // contraction with a direction vector u^a (tensoriality in the direction)
  double function_along(const Christoffels& ch, const Point& p, const Eigen::VectorXd& u) const;
  Eigen::VectorXd section_along(const Christoffels& ch, const Point& p,
                                const Eigen::VectorXd& u) const;
  Eigen::VectorXd one_form_along(const Christoffels& ch, const Point& p,
                                 const Eigen::VectorXd& u) const;
  Eigen::MatrixXd endo_along(const Christoffels& ch, const Point& p,
                             const Eigen::VectorXd& u) const;
  Eigen::MatrixXd cov2_along(const Christoffels& ch, const Point& p,
                             const Eigen::VectorXd& u) const;

 private:
  const Connection* conn_;
  TensorField T_;
  std::vector<std::vector<Expr>> danch_;  // rho_a applied to each flat component
};

/// One-shot covariant derivative (nabla_s T) at a point, for sections,
/// 1-forms, (1,1)-tensors and (0,2)-tensors. Prepares a CovariantField per
/// call; grid loops should hold a CovariantField instead.
Eigen::VectorXd covariant_derivative_at(const Connection& conn, const TensorField& T,
                                        const TensorField& s, const Point& p);
Eigen::MatrixXd covariant_derivative_matrix_at(const Connection& conn, const TensorField& T,
                                               const TensorField& s, const Point& p);

/// G-orthonormal frame at a point by modified Gram-Schmidt on the algebroid
/// frame taken in `order` (defaults to 0..m-1). Deterministic.
std::vector<Eigen::VectorXd> orthonormal_frame(const Eigen::MatrixXd& G,
                                               std::span<const int> order = {});

/// F-adapted orthonormal frame {s_1..s_m, F(s_1)..F(s_m), xi} at p, built by
/// iterated projection against the chosen vectors and their F-images.
std::vector<Eigen::VectorXd> fe_basis(const TensorField& F, const TensorField& xi,
                                      const TensorField& eta, const BundleMetric& g,
                                      const Point& p);

/// sqrt(det g) e^1 ^ ... ^ e^m.
TensorField volume_form(const BundleMetric& g);

/// Exterior codifferential -sum_a iota_{u_a} (nabla_{u_a} omega) over a
/// pointwise orthonormal frame; returns canonical components of the
/// (p-1)-form at p (empty vector for degree-0 input).
std::vector<double> codifferential_at(const Connection& conn, const CovariantField& omega,
                                      const Point& p, std::span<const int> seed_order = {});

// symbolic determinant / inverse for small Expr matrices
Expr expr_det(const std::vector<std::vector<Expr>>& M);
std::vector<std::vector<Expr>> expr_inverse(const std::vector<std::vector<Expr>>& M);

}  // namespace lalg
