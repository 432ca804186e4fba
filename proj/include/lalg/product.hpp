#pragma once

#include "lalg/contact.hpp"

namespace lalg {

/// Direct product E1 x E2 over the product chart: block-diagonal anchor,
/// vanishing mixed structure functions.
struct ProductAlgebroid {
  AlgebroidPtr combined;
  AlgebroidPtr E1;
  AlgebroidPtr E2;
  int m1 = 0, m2 = 0;  // factor ranks
  int n1 = 0, n2 = 0;  // factor chart dimensions
};

ProductAlgebroid direct_product(const AlgebroidPtr& E1, const AlgebroidPtr& E2);

/// Re-expresses a factor coefficient function over the product chart.
Expr lift_expr(const ProductAlgebroid& P, int factor, const Expr& e);
TensorField lift_section(const ProductAlgebroid& P, int factor, const TensorField& s);
TensorField lift_one_form(const ProductAlgebroid& P, int factor, const TensorField& w);
TensorField lift_endo(const ProductAlgebroid& P, int factor, const TensorField& A);
BundleMetric product_metric(const ProductAlgebroid& P, const BundleMetric& g1,
                            const BundleMetric& g2);

/// Almost Hermitian factor (J, g1) x almost contact Riemannian factor ->
/// almost contact Riemannian structure on the product.
AlmostContactStructure product_acr(const ProductAlgebroid& P, const TensorField& J1,
                                   const BundleMetric& g1, const AlmostContactStructure& acr2);

struct HermitianPair {
  TensorField J;
  BundleMetric g;
};

/// Two almost contact Riemannian factors -> almost Hermitian structure on the
/// product; J is Hermitian (N_J = 0) exactly when both factors are normal.
HermitianPair product_hermitian(const ProductAlgebroid& P, const AlmostContactStructure& a1,
                                const AlmostContactStructure& a2);

struct ConeStructure {
  AlgebroidPtr extended;  // E (+) trivial line algebroid over the same chart
  TensorField J;          // J(s (+) f s_L) = (F s - f xi) (+) eta(s) s_L
};

/// Rank-(2m+2) almost complex structure from an almost contact structure and
/// a trivial line algebroid.
ConeStructure cone_complex_structure(const AlmostContactStructure& acr);

}  // namespace lalg
