#pragma once

#include "lalg/contact.hpp"

namespace lalg {

/// Vertical geometry over the big-tangent chart (x, y, p) of a Riemannian
/// base metric g_{ij}(x): the rank-2n vertical algebroid with frame
/// {d/dy^i, d/dp_i}, the block metric G, the fiberwise complex structure phi,
/// the normalized Liouville sections xi_1, xi_2 and their dual 1-forms.
struct BigTangentModel {
  int n = 0;
  AlgebroidPtr V;  // rank 2n over the 3n-dimensional chart
  std::vector<std::vector<Expr>> g;     // g_{ij}(x)
  std::vector<std::vector<Expr>> ginv;  // g^{ij}(x)
  Expr F2, K2, lambda;                  // |y|^2, |p|^2, sqrt(F2 + K2)
  std::vector<Expr> y_low, p_up;        // y_i = g_{ij} y^j, p^i = g^{ij} p_j
  BundleMetric G;
  TensorField phi;
  TensorField xi1, xi2;
  TensorField omega1, omega2;
};

/// `g_base` is an n x n symmetric Expr matrix over the variables x1..xn
/// (indices 0..n-1); `box` bounds the full (x, y, p) chart.
BigTangentModel build_big_tangent(int n, const std::vector<std::vector<Expr>>& g_base,
                                  const std::vector<std::pair<double, double>>& box);

/// Halton points in the chart box with the zero section removed:
/// F^2 + K^2 >= margin at every kept point.
SampleGrid big_tangent_grid(const BigTangentModel& model, std::size_t count, unsigned seed,
                            double margin = 0.5, double tol_eq = 1e-9,
                            double tol_nonzero = 1e-9);

struct FramedFStructure {
  TensorField f;
  Report report;
};

/// f = phi - omega^2 (x) xi_1 + omega^1 (x) xi_2 and the full identity suite
/// of a framed f(3,1)-structure of corank 2 (including numeric rank 2n-2).
FramedFStructure framed_f_structure(const BigTangentModel& model, const SampleGrid& grid);

struct PhiFormResult {
  TensorField Phi;  // 2-form G(f(.), .)
  Report report;
};

/// Component identities of Phi, the half-convention components of d_V omega^1,
/// the decomposition Phi = 2 sqrt(F^2+K^2) d_V omega^1 + theta^i ^ k_i, the
/// 2-dimensional annihilator and the bracket [xi_1, xi_2] = xi_1 / sqrt(F^2+K^2).
PhiFormResult phi_form_and_decomposition(const BigTangentModel& model, const SampleGrid& grid);

struct LiouvilleRestriction {
  TensorField P;                              // projector I - omega^2 (x) xi_2
  std::vector<TensorField> restricted_frame;  // P(d/dy^i), P(d/dp_i)
  TensorField f_bar;                          // f o P
  TensorField xi_bar;                         // xi_1
  TensorField eta_bar;                        // omega^1
  Report report;
};

/// Projector onto the vertical Liouville distribution, its metric identities,
/// and integrability of the distribution (brackets of projected frame fields
/// stay inside ker omega^2).
LiouvilleRestriction liouville_restriction(const BigTangentModel& model, const SampleGrid& grid);

/// Almost contact identities of (f_bar, xi_1, omega^1) on the restriction, the
/// compatibility of the restricted metric, the component identities relating
/// d_bar eta_bar to Phi_bar, and nondegeneracy of the restricted contact form.
Report verify_contact_on_restriction(const BigTangentModel& model,
                                     const LiouvilleRestriction& restriction,
                                     const SampleGrid& grid);

}  // namespace lalg
