#pragma once

// Shared fixtures: the chart (x1, x2, x3) plays the role of (x, y, z).

#include <random>

#include "lalg/combo.hpp"
#include "lalg/contact.hpp"

namespace fixtures {

using namespace lalg;

inline std::vector<std::string> vars3(const std::string& prefix = "x") {
  return {prefix + "1", prefix + "2", prefix + "3"};
}

inline Chart chart3(const std::string& prefix = "x", double lo = -1.0, double hi = 1.0) {
  Chart c;
  c.variables = vars3(prefix);
  c.box = {{lo, hi}, {lo, hi}, {lo, hi}};
  return c;
}

inline Expr E3(const std::string& text, const std::string& prefix = "x") {
  // fixture expressions are written over x1, x2, x3; other prefixes reuse the
  // same text with the variables renamed
  std::string t = text;
  if (prefix != "x") {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] == 'x' && i + 1 < t.size() && t[i + 1] >= '1' && t[i + 1] <= '3')
        out += prefix;
      else
        out += t[i];
    }
    t = out;
  }
  return parse_expr(t, vars3(prefix));
}

inline AlgebroidPtr tangent_r3(const std::string& prefix = "x") {
  return LieAlgebroid::tangent(chart3(prefix));
}

inline AlgebroidPtr tangent_r1() {
  Chart c;
  c.variables = {"x1"};
  c.box = {{-1.0, 1.0}};
  return LieAlgebroid::tangent(c);
}

/// so(3) action algebroid on R^3: anchors are the rotation fields, and the
/// frame bracket matches [V_a, V_b] = -eps_abc V_c.
inline AlgebroidPtr so3_action() {
  Chart c = chart3();
  std::vector<std::vector<Expr>> anchor = {
      {E3("0"), E3("-x3"), E3("x2")}, {E3("x3"), E3("0"), E3("-x1")}, {E3("-x2"), E3("x1"), E3("0")}};
  std::vector<std::vector<std::vector<Expr>>> C(
      3, std::vector<std::vector<Expr>>(3, std::vector<Expr>(3)));
  auto set = [&](int a, int b, int cc, double v) {
    C[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(cc)] =
        Expr::constant(v);
    C[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)][static_cast<std::size_t>(cc)] =
        Expr::constant(-v);
  };
  set(0, 1, 2, -1.0);
  set(1, 2, 0, -1.0);
  set(2, 0, 1, -1.0);
  return make_algebroid(c, 3, std::move(anchor), std::move(C));
}

/// Structure functions that violate the Jacobi identity away from x1 = 0
/// (anchor is zero, so the residual is purely fiberwise).
inline AlgebroidPtr broken_jacobi() {
  Chart c = chart3();
  std::vector<std::vector<Expr>> anchor(3, std::vector<Expr>(3));
  std::vector<std::vector<std::vector<Expr>>> C(
      3, std::vector<std::vector<Expr>>(3, std::vector<Expr>(3)));
  C[0][1][1] = E3("x1");
  C[1][0][1] = E3("-x1");
  C[1][2][0] = E3("1");
  C[2][1][0] = E3("-1");
  return make_algebroid(c, 3, std::move(anchor), std::move(C));
}

inline TensorField heisenberg_F(const AlgebroidPtr& E, const std::string& px = "x") {
  return TensorField::endomorphism(E, {{E3("0", px), E3("1", px), E3("0", px)},
                                       {E3("-1", px), E3("0", px), E3("0", px)},
                                       {E3("0", px), E3("x2", px), E3("0", px)}});
}

/// Contact fixture in the plain normalization: eta = dz - y dx, xi = d/dz,
/// unit-determinant metric; d eta equals the fundamental form exactly.
inline AlmostContactStructure tr3_contact_plain(const std::string& px = "x") {
  AlgebroidPtr E = tangent_r3(px);
  TensorField F = heisenberg_F(E, px);
  TensorField xi = TensorField::section(E, {E3("0", px), E3("0", px), E3("1", px)});
  TensorField eta = TensorField::one_form(E, {E3("-x2", px), E3("0", px), E3("1", px)});
  BundleMetric g{E,
                 {{E3("1 + x2^2", px), E3("0", px), E3("-x2", px)},
                  {E3("0", px), E3("1", px), E3("0", px)},
                  {E3("-x2", px), E3("0", px), E3("1", px)}}};
  return AlmostContactStructure{E, F, xi, eta, g, DConvention::Plain};
}

/// The same Heisenberg structure normalized for the half convention
/// (eta and the metric scaled so that the covariant characterizations of
/// K-contact / Sasakian hold verbatim).
inline AlmostContactStructure tr3_sasakian_half(const std::string& px = "x") {
  AlgebroidPtr E = tangent_r3(px);
  TensorField F = heisenberg_F(E, px);
  TensorField xi = TensorField::section(E, {E3("0", px), E3("0", px), E3("2", px)});
  TensorField eta = TensorField::one_form(E, {E3("-x2/2", px), E3("0", px), E3("1/2", px)});
  BundleMetric g{E,
                 {{E3("(1 + x2^2)/4", px), E3("0", px), E3("-x2/4", px)},
                  {E3("0", px), E3("1/4", px), E3("0", px)},
                  {E3("-x2/4", px), E3("0", px), E3("1/4", px)}}};
  return AlmostContactStructure{E, F, xi, eta, g, DConvention::Half};
}

/// Rank-5 analogue of the half-normalized Heisenberg structure
/// (coordinates u1, v1, u2, v2, z as x1..x5): eta = (dz - v1 du1 - v2 du2)/2,
/// xi = 2 d/dz, adapted F and the quarter-scaled block metric. Classifies
/// Sasakian; the volume ratio is 2^m m! = 8.
inline AlmostContactStructure tr5_sasakian_half() {
  Chart c;
  c.variables = {"x1", "x2", "x3", "x4", "x5"};
  c.box.assign(5, {-1.0, 1.0});
  AlgebroidPtr E = LieAlgebroid::tangent(c);
  auto e = [&](const std::string& s) { return parse_expr(s, c.variables); };
  auto z = [&] { return e("0"); };
  TensorField F = TensorField::endomorphism(
      E, {{z(), e("1"), z(), z(), z()},
          {e("-1"), z(), z(), z(), z()},
          {z(), z(), z(), e("1"), z()},
          {z(), z(), e("-1"), z(), z()},
          {z(), e("x2"), z(), e("x4"), z()}});
  TensorField xi = TensorField::section(E, {z(), z(), z(), z(), e("2")});
  TensorField eta = TensorField::one_form(E, {e("-x2/2"), z(), e("-x4/2"), z(), e("1/2")});
  BundleMetric g{E,
                 {{e("(1 + x2^2)/4"), z(), e("x2*x4/4"), z(), e("-x2/4")},
                  {z(), e("1/4"), z(), z(), z()},
                  {e("x2*x4/4"), z(), e("(1 + x4^2)/4"), z(), e("-x4/4")},
                  {z(), z(), z(), e("1/4"), z()},
                  {e("-x2/4"), z(), e("-x4/4"), z(), e("1/4")}}};
  return AlmostContactStructure{E, F, xi, eta, g, DConvention::Half};
}

/// Warped fixture: g = dz^2 + e^{2z}(dx^2 + dy^2), eta = dz, F the fiber
/// rotation; Kenmotsu but not K-contact.
inline AlmostContactStructure kenmotsu_fixture() {
  AlgebroidPtr E = tangent_r3();
  TensorField F = TensorField::endomorphism(
      E, {{E3("0"), E3("-1"), E3("0")}, {E3("1"), E3("0"), E3("0")}, {E3("0"), E3("0"), E3("0")}});
  TensorField xi = TensorField::section(E, {E3("0"), E3("0"), E3("1")});
  TensorField eta = TensorField::one_form(E, {E3("0"), E3("0"), E3("1")});
  BundleMetric g{E,
                 {{E3("exp(2*x3)"), E3("0"), E3("0")},
                  {E3("0"), E3("exp(2*x3)"), E3("0")},
                  {E3("0"), E3("0"), E3("1")}}};
  return AlmostContactStructure{E, F, xi, eta, g, DConvention::Plain};
}

/// Almost contact Riemannian but not normal: the complex structure on the
/// contact planes twists with x3, which makes N_F fail to vanish.
inline AlmostContactStructure nonnormal_fixture(const std::string& px = "x") {
  AlgebroidPtr E = tangent_r3(px);
  TensorField F = TensorField::endomorphism(E, {{E3("0", px), E3("-1/(1 + x3^2)", px), E3("0", px)},
                                                {E3("1 + x3^2", px), E3("0", px), E3("0", px)},
                                                {E3("0", px), E3("0", px), E3("0", px)}});
  TensorField xi = TensorField::section(E, {E3("0", px), E3("0", px), E3("1", px)});
  TensorField eta = TensorField::one_form(E, {E3("0", px), E3("0", px), E3("1", px)});
  AlmostContactStructure acs{E, F, xi, eta, std::nullopt, DConvention::Plain};
  acs.metric = build_compatible_metric(acs, BundleMetric::euclidean(E));
  return acs;
}

inline SampleGrid grid_for(const AlgebroidPtr& E, std::size_t count = 50, unsigned seed = 5) {
  return make_grid(E->chart(), count, seed);
}

/// Deterministic random polynomial in the chart variables.
inline Expr random_poly(const Chart& chart, std::mt19937& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, int(chart.dim()) - 1);
  Expr acc = Expr::constant(coeff(rng));
  for (int t = 0; t < 3; ++t) {
    int v = pick(rng), w = pick(rng);
    Expr term = Expr::constant(coeff(rng)) *
                Expr::variable(v, chart.variables[static_cast<std::size_t>(v)]) *
                Expr::variable(w, chart.variables[static_cast<std::size_t>(w)]);
    acc = acc + term;
  }
  int v = pick(rng);
  return acc + Expr::constant(coeff(rng)) *
                   Expr::variable(v, chart.variables[static_cast<std::size_t>(v)]);
}

inline TensorField random_section(const AlgebroidPtr& E, std::mt19937& rng) {
  std::vector<Expr> comps;
  for (int a = 0; a < E->rank(); ++a) comps.push_back(random_poly(E->chart(), rng));
  return TensorField::section(E, std::move(comps));
}

inline TensorField random_form(const AlgebroidPtr& E, int degree, std::mt19937& rng) {
  std::vector<Expr> comps;
  for (long long k = 0; k < binom(E->rank(), degree); ++k)
    comps.push_back(random_poly(E->chart(), rng));
  return TensorField::form(E, degree, std::move(comps));
}

}  // namespace fixtures
