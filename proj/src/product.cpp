#include "lalg/product.hpp"

#include <set>
#include <stdexcept>

namespace lalg {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ProductAlgebroid direct_product(const AlgebroidPtr& E1, const AlgebroidPtr& E2) {
  const Chart& c1 = E1->chart();
  const Chart& c2 = E2->chart();
  std::set<std::string> names(c1.variables.begin(), c1.variables.end());
  for (const auto& v : c2.variables)
    require(names.insert(v).second, "direct_product: variable-name collision '" + v + "'");

  Chart chart;
  chart.variables = c1.variables;
  chart.variables.insert(chart.variables.end(), c2.variables.begin(), c2.variables.end());
  chart.box = c1.box;
  chart.box.insert(chart.box.end(), c2.box.begin(), c2.box.end());

  int n1 = E1->dim(), n2 = E2->dim();
  int m1 = E1->rank(), m2 = E2->rank();
  int m = m1 + m2, n = n1 + n2;

  std::vector<int> map2(static_cast<std::size_t>(n2));
  for (int i = 0; i < n2; ++i) map2[static_cast<std::size_t>(i)] = n1 + i;

  std::vector<std::vector<Expr>> anchor(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(n)));
  for (int a = 0; a < m1; ++a)
    for (int i = 0; i < n1; ++i) anchor[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = E1->anchor(a, i);
  for (int a = 0; a < m2; ++a)
    for (int i = 0; i < n2; ++i)
      anchor[static_cast<std::size_t>(m1 + a)][static_cast<std::size_t>(n1 + i)] = E2->anchor(a, i).remap_variables(map2);

  std::vector<std::vector<std::vector<Expr>>> C(
      static_cast<std::size_t>(m),
      std::vector<std::vector<Expr>>(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m))));
  for (int a = 0; a < m1; ++a)
    for (int b = 0; b < m1; ++b)
      for (int c = 0; c < m1; ++c) C[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] = E1->structure(a, b, c);
  for (int a = 0; a < m2; ++a)
    for (int b = 0; b < m2; ++b)
      for (int c = 0; c < m2; ++c)
        C[static_cast<std::size_t>(m1 + a)][static_cast<std::size_t>(m1 + b)][static_cast<std::size_t>(m1 + c)] =
            E2->structure(a, b, c).remap_variables(map2);

  ProductAlgebroid P;
  P.combined = make_algebroid(std::move(chart), m, std::move(anchor), std::move(C));
  P.E1 = E1;
  P.E2 = E2;
  P.m1 = m1;
  P.m2 = m2;
  P.n1 = n1;
  P.n2 = n2;
  return P;
}

Expr lift_expr(const ProductAlgebroid& P, int factor, const Expr& e) {
  if (factor == 1) return e;  // factor-1 variables keep their indices
  std::vector<int> map2(static_cast<std::size_t>(P.n2));
  for (int i = 0; i < P.n2; ++i) map2[static_cast<std::size_t>(i)] = P.n1 + i;
  return e.remap_variables(map2);
}

TensorField lift_section(const ProductAlgebroid& P, int factor, const TensorField& s) {
  int m = P.m1 + P.m2;
  std::vector<Expr> comps(static_cast<std::size_t>(m));
  int offset = factor == 1 ? 0 : P.m1;
  int mf = factor == 1 ? P.m1 : P.m2;
  for (int a = 0; a < mf; ++a)
    comps[static_cast<std::size_t>(offset + a)] = lift_expr(P, factor, s.section_component(a));
  return TensorField::section(P.combined, std::move(comps));
}

TensorField lift_one_form(const ProductAlgebroid& P, int factor, const TensorField& w) {
  int m = P.m1 + P.m2;
  std::vector<Expr> comps(static_cast<std::size_t>(m));
  int offset = factor == 1 ? 0 : P.m1;
  int mf = factor == 1 ? P.m1 : P.m2;
  for (int a = 0; a < mf; ++a)
    comps[static_cast<std::size_t>(offset + a)] = lift_expr(P, factor, w.form_canonical(a));
  return TensorField::one_form(P.combined, std::move(comps));
}

TensorField lift_endo(const ProductAlgebroid& P, int factor, const TensorField& A) {
  int m = P.m1 + P.m2;
  std::vector<std::vector<Expr>> comps(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  int offset = factor == 1 ? 0 : P.m1;
  int mf = factor == 1 ? P.m1 : P.m2;
  for (int i = 0; i < mf; ++i)
    for (int j = 0; j < mf; ++j)
      comps[static_cast<std::size_t>(offset + i)][static_cast<std::size_t>(offset + j)] =
          lift_expr(P, factor, A.endo_component(i, j));
  return TensorField::endomorphism(P.combined, std::move(comps));
}

BundleMetric product_metric(const ProductAlgebroid& P, const BundleMetric& g1,
                            const BundleMetric& g2) {
  int m = P.m1 + P.m2;
  std::vector<std::vector<Expr>> comps(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < P.m1; ++a)
    for (int b = 0; b < P.m1; ++b) comps[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = lift_expr(P, 1, g1(a, b));
  for (int a = 0; a < P.m2; ++a)
    for (int b = 0; b < P.m2; ++b)
      comps[static_cast<std::size_t>(P.m1 + a)][static_cast<std::size_t>(P.m1 + b)] = lift_expr(P, 2, g2(a, b));
  return BundleMetric{P.combined, std::move(comps)};
}

AlmostContactStructure product_acr(const ProductAlgebroid& P, const TensorField& J1,
                                   const BundleMetric& g1, const AlmostContactStructure& acr2) {
  require(P.m1 % 2 == 0, "product_acr: first factor must have even rank");
  require(acr2.metric.has_value(), "product_acr: second factor needs a metric");
  TensorField F = lift_endo(P, 1, J1) + lift_endo(P, 2, acr2.F);
  TensorField xi = lift_section(P, 2, acr2.xi);
  TensorField eta = lift_one_form(P, 2, acr2.eta);
  BundleMetric g = product_metric(P, g1, *acr2.metric);
  return AlmostContactStructure{P.combined, std::move(F), std::move(xi), std::move(eta),
                                std::move(g), acr2.convention};
}

HermitianPair product_hermitian(const ProductAlgebroid& P, const AlmostContactStructure& a1,
                                const AlmostContactStructure& a2) {
  require(a1.metric.has_value() && a2.metric.has_value(),
          "product_hermitian: both factors need metrics");
  int m = P.m1 + P.m2;
  std::vector<std::vector<Expr>> J(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  // blocks F1 and F2
  for (int i = 0; i < P.m1; ++i)
    for (int j = 0; j < P.m1; ++j)
      J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = lift_expr(P, 1, a1.F.endo_component(i, j));
  for (int i = 0; i < P.m2; ++i)
    for (int j = 0; j < P.m2; ++j)
      J[static_cast<std::size_t>(P.m1 + i)][static_cast<std::size_t>(P.m1 + j)] = lift_expr(P, 2, a2.F.endo_component(i, j));
  // J(0 (+) s2) = -eta2(s2) xi1 (+) F2 s2 ; J(s1 (+) 0) = F1 s1 (+) eta1(s1) xi2
  for (int i = 0; i < P.m1; ++i)
    for (int j = 0; j < P.m2; ++j)
      J[static_cast<std::size_t>(i)][static_cast<std::size_t>(P.m1 + j)] =
          -lift_expr(P, 1, a1.xi.section_component(i)) * lift_expr(P, 2, a2.eta.form_canonical(j));
  for (int i = 0; i < P.m2; ++i)
    for (int j = 0; j < P.m1; ++j)
      J[static_cast<std::size_t>(P.m1 + i)][static_cast<std::size_t>(j)] =
          lift_expr(P, 2, a2.xi.section_component(i)) * lift_expr(P, 1, a1.eta.form_canonical(j));
  return HermitianPair{TensorField::endomorphism(P.combined, std::move(J)),
                       product_metric(P, *a1.metric, *a2.metric)};
}

ConeStructure cone_complex_structure(const AlmostContactStructure& acr) {
  const AlgebroidPtr& E = acr.owner;
  int m = E->rank();
  int n = E->dim();

  // E (+) trivial line over the same chart: one extra frame section with zero
  // anchor and vanishing brackets.
  std::vector<std::vector<Expr>> anchor(static_cast<std::size_t>(m + 1), std::vector<Expr>(static_cast<std::size_t>(n)));
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < n; ++i) anchor[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = E->anchor(a, i);
  std::vector<std::vector<std::vector<Expr>>> C(
      static_cast<std::size_t>(m + 1),
      std::vector<std::vector<Expr>>(static_cast<std::size_t>(m + 1), std::vector<Expr>(static_cast<std::size_t>(m + 1))));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) C[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] = E->structure(a, b, c);
  AlgebroidPtr extended = make_algebroid(E->chart(), m + 1, std::move(anchor), std::move(C));

  std::vector<std::vector<Expr>> J(static_cast<std::size_t>(m + 1), std::vector<Expr>(static_cast<std::size_t>(m + 1)));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acr.F.endo_component(i, j);
    J[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)] = -acr.xi.section_component(i);
    J[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] = acr.eta.form_canonical(i);
  }
  return ConeStructure{extended, TensorField::endomorphism(extended, std::move(J))};
}

}  // namespace lalg
