#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "lalg/expr.hpp"
#include "lalg/grid.hpp"
#include "lalg/report.hpp"

namespace lalg {

class LieAlgebroid;
using AlgebroidPtr = std::shared_ptr<const LieAlgebroid>;

/// A Lie algebroid over a single coordinate chart: anchor matrix rho_a^i(x)
/// and structure functions C^c_{ab}(x) of the frame bracket [e_a, e_b].
class LieAlgebroid {
 public:
  LieAlgebroid(Chart chart, int rank, std::vector<std::vector<Expr>> anchor,
               std::vector<std::vector<std::vector<Expr>>> structure);

  /// Tangent algebroid of the chart: identity anchor, vanishing structure.
  static AlgebroidPtr tangent(Chart chart);

  const Chart& chart() const { return chart_; }
  int rank() const { return rank_; }
  int dim() const { return int(chart_.dim()); }

  const Expr& anchor(int a, int i) const { return anchor_[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)]; }
  const Expr& structure(int a, int b, int c) const {
    return structure_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(c)];
  }

  /// rho(e_a)(f) = rho_a^i df/dx^i
  Expr rho_frame_apply(int a, const Expr& f) const;

 private:
  Chart chart_;
  int rank_;
  std::vector<std::vector<Expr>> anchor_;                  // [a][i]
  std::vector<std::vector<std::vector<Expr>>> structure_;  // [a][b][c] = C^c_{ab}
};

AlgebroidPtr make_algebroid(Chart chart, int rank, std::vector<std::vector<Expr>> anchor,
                            std::vector<std::vector<std::vector<Expr>>> structure);

/// Which normalization the coordinate formula for d_E on 1-forms assumes.
/// Half scales the plain Cartan formula by 1/2 on 1-forms; the flag exists
/// because different sources fix different conventions and classification
/// predicates must be tested under the one a structure was built with.
enum class DConvention { Plain, Half };

/// Graded tensor field over an algebroid frame. Forms store only canonical
/// (strictly increasing) components and sign-expand on access.
class TensorField {
 public:
  enum class Kind { Form, Section, Endomorphism, Covariant2, VectorValued2Form };

  TensorField() = default;  // empty field, only usable as an assignment target

  static TensorField function(AlgebroidPtr E, Expr f);
  static TensorField section(AlgebroidPtr E, std::vector<Expr> comps);
  static TensorField frame_section(AlgebroidPtr E, int a);
  static TensorField one_form(AlgebroidPtr E, std::vector<Expr> comps);
  /// degree-p form from canonical components in lexicographic combo order
  static TensorField form(AlgebroidPtr E, int degree, std::vector<Expr> canonical);
  /// 2-form from its values on pairs a < b (row-major strict upper triangle)
  static TensorField form2(AlgebroidPtr E, const std::vector<std::vector<Expr>>& values);
  static TensorField endomorphism(AlgebroidPtr E, std::vector<std::vector<Expr>> comps);
  static TensorField identity_endomorphism(AlgebroidPtr E);
  static TensorField covariant2(AlgebroidPtr E, std::vector<std::vector<Expr>> comps);
  static TensorField vector_valued_2form(AlgebroidPtr E, std::vector<std::vector<Expr>> comps);

  Kind kind() const { return kind_; }
  int degree() const { return degree_; }
  const AlgebroidPtr& owner() const { return owner_; }
  int rank() const;

  // symbolic component access
  const Expr& form_canonical(int combo_rank) const;
  Expr form_component(std::vector<int> indices) const;  // sign-expanded
  const Expr& section_component(int c) const;
  const Expr& endo_component(int i, int j) const;  // e^i(T(e_j))
  const Expr& cov2_component(int a, int b) const;
  Expr vv2_component(int a, int b, int c) const;  // e^c(T(e_a, e_b))
  int form_term_count() const;

  // pointwise numeric evaluation
  double eval_function(const Point& p) const;
  Eigen::VectorXd eval_vector(const Point& p) const;  // Section or degree-1 Form
  std::vector<double> eval_form(const Point& p) const;
  Eigen::MatrixXd eval_matrix(const Point& p) const;  // Endomorphism or Covariant2
  Eigen::MatrixXd eval_form2_matrix(const Point& p) const;
  Eigen::VectorXd eval_vv2(int a, int b, const Point& p) const;

  TensorField operator+(const TensorField& o) const;
  TensorField operator-(const TensorField& o) const;
  TensorField scaled(const Expr& factor) const;
  TensorField scaled(double factor) const;

 private:
  TensorField(AlgebroidPtr E, Kind kind, int degree, std::vector<Expr> comps);

  AlgebroidPtr owner_;
  Kind kind_ = Kind::Form;
  int degree_ = 0;  // Form only
  std::vector<Expr> comps_;
};

// --- Cartan calculus -------------------------------------------------------

/// [s1, s2] with the Leibniz extension of the frame bracket.
TensorField bracket(const TensorField& s1, const TensorField& s2);

/// rho(s)(f) for a section s and scalar function f.
TensorField anchor_apply(const TensorField& s, const TensorField& f);
Expr anchor_apply_expr(const TensorField& s, const Expr& f);

/// Exterior derivative; Half divides the result by 2 on 1-form input.
TensorField exterior_derivative(const TensorField& omega,
                                DConvention convention = DConvention::Plain);

/// First-slot contraction; rejects degree-0 input.
TensorField interior_product(const TensorField& s, const TensorField& omega);

/// Lie derivative along s of a function, section, p-form, (1,1)-tensor or
/// (0,2)-tensor. Forms use the Cartan formula with the plain derivative.
TensorField lie_derivative(const TensorField& s, const TensorField& T);

/// Shuffle-convention wedge: (e^1 ^ e^2)(e_1, e_2) = 1.
TensorField wedge(const TensorField& w1, const TensorField& w2);

/// Nijenhuis tensor of a (1,1)-tensor; antisymmetric vector-valued 2-form.
TensorField nijenhuis(const TensorField& A);

// --- linear-algebraic helpers ---------------------------------------------

TensorField apply_endo(const TensorField& A, const TensorField& s);
TensorField compose_endo(const TensorField& A, const TensorField& B);
TensorField outer(const TensorField& one_form, const TensorField& section);
Expr pair_form_section(const TensorField& one_form, const TensorField& s);
Expr bilinear(const TensorField& cov2, const TensorField& s1, const TensorField& s2);
/// One-form g(s, .) for a (0,2)-tensor g.
TensorField lower_index(const TensorField& cov2, const TensorField& s);

/// Jacobi identity, anchor-morphism and structure-function skewness residuals.
Report validate(const LieAlgebroid& E, const SampleGrid& grid);

}  // namespace lalg
