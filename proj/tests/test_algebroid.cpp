#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"

using namespace lalg;
using namespace fixtures;

namespace {

double max_over_grid(const SampleGrid& grid, const PointKernel& k) {
  return scan_grid(grid, k).max_abs;
}

double max_abs_vec(const TensorField& t, const Point& p) {
  auto v = t.eval_vector(p);
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

double max_abs_form(const TensorField& t, const Point& p) {
  double worst = 0.0;
  for (double v : t.eval_form(p)) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace

TEST_CASE("coordinate frame sections commute on the tangent algebroid") {
  auto E = tangent_r3();
  auto grid = grid_for(E);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      TensorField br = bracket(TensorField::frame_section(E, a), TensorField::frame_section(E, b));
      CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_vec(br, p); }) < 1e-15);
    }
}

TEST_CASE("bracket is antisymmetric: [s, s] = 0") {
  auto E = tangent_r3();
  auto grid = grid_for(E, 20);
  std::mt19937 rng(3);
  TensorField s = random_section(E, rng);
  TensorField br = bracket(s, s);
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_vec(br, p); }) < 1e-12);
}

TEST_CASE("hand-expanded bracket on TR3") {
  // [d/dy, d/dx + y d/dz] = d/dz
  auto E = tangent_r3();
  TensorField s1 = TensorField::section(E, {E3("0"), E3("1"), E3("0")});
  TensorField s2 = TensorField::section(E, {E3("1"), E3("0"), E3("x2")});
  TensorField br = bracket(s1, s2);
  auto grid = grid_for(E, 10);
  for (const auto& p : grid.points) {
    auto v = br.eval_vector(p);
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[1] == doctest::Approx(0.0));
    CHECK(v[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("anchor application") {
  auto E = tangent_r3();
  // identity anchor: rho(e_1)(x1) = 1
  TensorField f = TensorField::function(E, E3("x1"));
  TensorField r = anchor_apply(TensorField::frame_section(E, 0), f);
  auto grid = grid_for(E, 10);
  for (const auto& p : grid.points) CHECK(r.eval_function(p) == doctest::Approx(1.0));

  // derivations kill constants
  TensorField c = TensorField::function(E, E3("4.25"));
  std::mt19937 rng(11);
  TensorField s = random_section(E, rng);
  TensorField rc = anchor_apply(s, c);
  for (const auto& p : grid.points) CHECK(rc.eval_function(p) == doctest::Approx(0.0));

  // s = y d/dz applied to z^2 gives 2yz
  TensorField s2 = TensorField::section(E, {E3("0"), E3("0"), E3("x2")});
  TensorField z2 = TensorField::function(E, E3("x3^2"));
  TensorField rz = anchor_apply(s2, z2);
  for (const auto& p : grid.points)
    CHECK(rz.eval_function(p) == doctest::Approx(2.0 * p[1] * p[2]));
}

TEST_CASE("Leibniz rule of the extended bracket") {
  for (const AlgebroidPtr& E : {tangent_r3(), so3_action()}) {
    auto grid = grid_for(E, 30);
    std::mt19937 rng(17);
    for (int trial = 0; trial < 4; ++trial) {
      TensorField s1 = random_section(E, rng);
      TensorField s2 = random_section(E, rng);
      Expr f = random_poly(E->chart(), rng);
      std::vector<Expr> fs2;
      for (int c = 0; c < E->rank(); ++c) fs2.push_back(f * s2.section_component(c));
      TensorField lhs = bracket(s1, TensorField::section(E, fs2));
      std::vector<Expr> rhs;
      Expr df = anchor_apply_expr(s1, f);
      TensorField br = bracket(s1, s2);
      for (int c = 0; c < E->rank(); ++c)
        rhs.push_back(f * br.section_component(c) + df * s2.section_component(c));
      TensorField res = lhs - TensorField::section(E, rhs);
      CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_vec(res, p); }) < 1e-9);
    }
  }
}

TEST_CASE("validate: tangent and so(3) pass, broken fixture fails") {
  auto grid = grid_for(tangent_r3());
  Report r1 = validate(*tangent_r3(), grid);
  CHECK(r1.all_pass());

  Report r2 = validate(*so3_action(), grid_for(so3_action()));
  CHECK(r2.all_pass());

  Report r3 = validate(*broken_jacobi(), grid);
  CHECK_FALSE(r3.all_pass());
  const CheckResult& jac = r3.entry("jacobi");
  CHECK_FALSE(jac.pass);
  // residual grows like |x1|; the reported worst point realizes it
  CHECK(jac.value == doctest::Approx(std::abs(jac.worst[0])));
}

TEST_CASE("exterior derivative: hand values on the contact form") {
  auto E = tangent_r3();
  TensorField eta = TensorField::one_form(E, {E3("-x2"), E3("0"), E3("1")});
  TensorField deta = exterior_derivative(eta);
  // d eta = dx ^ dy: value -1 on (d/dy, d/dx + y d/dz)
  auto grid = grid_for(E, 10);
  for (const auto& p : grid.points) {
    Eigen::MatrixXd W = deta.eval_form2_matrix(p);
    Eigen::Vector3d u(0, 1, 0), v(1, 0, p[1]);
    CHECK(u.dot(W * v) == doctest::Approx(-1.0));
  }
  // half convention scales 1-form derivatives by 1/2
  TensorField dh = exterior_derivative(eta, DConvention::Half);
  for (const auto& p : grid.points)
    CHECK(dh.eval_form2_matrix(p)(0, 1) == doctest::Approx(0.5 * deta.eval_form2_matrix(p)(0, 1)));
}

TEST_CASE("d of constant 1-form with constant anchor and vanishing structure") {
  auto E = tangent_r3();
  TensorField e1 = TensorField::one_form(E, {E3("1"), E3("0"), E3("0")});
  TensorField d = exterior_derivative(e1);
  auto grid = grid_for(E, 10);
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(d, p); }) == 0.0);
}

TEST_CASE("d squared vanishes on validated algebroids") {
  for (const AlgebroidPtr& E : {tangent_r3(), so3_action()}) {
    auto grid = grid_for(E);
    std::mt19937 rng(23);
    TensorField f = TensorField::function(E, random_poly(E->chart(), rng));
    TensorField ddf = exterior_derivative(exterior_derivative(f));
    CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(ddf, p); }) < 1e-9);
    TensorField w = random_form(E, 1, rng);
    TensorField ddw = exterior_derivative(exterior_derivative(w));
    CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(ddw, p); }) < 1e-9);
  }
}

TEST_CASE("interior product") {
  auto E = tangent_r3();
  auto grid = grid_for(E, 15);
  // dual pairing
  TensorField e1 = TensorField::one_form(E, {E3("1"), E3("0"), E3("0")});
  TensorField i = interior_product(TensorField::frame_section(E, 0), e1);
  for (const auto& p : grid.points) CHECK(i.eval_function(p) == doctest::Approx(1.0));

  // iota_s iota_s omega = 0
  std::mt19937 rng(29);
  TensorField s = random_section(E, rng);
  TensorField w = random_form(E, 2, rng);
  TensorField ii = interior_product(s, interior_product(s, w));
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(ii, p); }) < 1e-12);

  // iota_xi d eta = 0 on the contact fixture
  TensorField eta = TensorField::one_form(E, {E3("-x2"), E3("0"), E3("1")});
  TensorField xi = TensorField::section(E, {E3("0"), E3("0"), E3("1")});
  TensorField r = interior_product(xi, exterior_derivative(eta));
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_vec(r, p); }) < 1e-14);

  CHECK_THROWS(interior_product(s, TensorField::function(E, E3("1"))));
}

TEST_CASE("Lie derivative") {
  auto E = tangent_r3();
  auto grid = grid_for(E, 25);
  std::mt19937 rng(31);
  TensorField s = random_section(E, rng);

  // constants are killed
  TensorField c = TensorField::function(E, E3("2"));
  TensorField lc = lie_derivative(s, c);
  CHECK(max_over_grid(grid, [&](const Point& p) { return std::abs(lc.eval_function(p)); }) == 0.0);

  // on sections: antisymmetry against the bracket
  TensorField t = random_section(E, rng);
  TensorField r = lie_derivative(s, t) + lie_derivative(t, s);
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_vec(r, p); }) < 1e-12);

  // L_xi eta = 0 on the contact fixture
  TensorField eta = TensorField::one_form(E, {E3("-x2"), E3("0"), E3("1")});
  TensorField xi = TensorField::section(E, {E3("0"), E3("0"), E3("1")});
  TensorField le = lie_derivative(xi, eta);
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_vec(le, p); }) < 1e-14);
}

TEST_CASE("Lie derivative of a 1-form matches the direct derivation formula") {
  // (L_s w)(u) = rho(s)(w(u)) - w([s, u])
  auto E = so3_action();
  auto grid = grid_for(E, 25);
  std::mt19937 rng(37);
  TensorField s = random_section(E, rng);
  TensorField w = random_form(E, 1, rng);
  TensorField lw = lie_derivative(s, w);
  for (int a = 0; a < 3; ++a) {
    TensorField ea = TensorField::frame_section(E, a);
    Expr direct = anchor_apply_expr(s, pair_form_section(w, ea)) -
                  pair_form_section(w, bracket(s, ea));
    Expr res = lw.form_canonical(a) - direct;
    CHECK(max_over_grid(grid, [&](const Point& p) { return std::abs(res.eval(p.coords)); }) <
          1e-10);
  }
}

TEST_CASE("wedge: normalization, graded commutativity, associativity") {
  auto E = tangent_r3();
  auto grid = grid_for(E, 20);

  TensorField e1 = TensorField::one_form(E, {E3("1"), E3("0"), E3("0")});
  TensorField e2 = TensorField::one_form(E, {E3("0"), E3("1"), E3("0")});
  TensorField w11 = wedge(e1, e1);
  CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(w11, p); }) == 0.0);
  TensorField w12 = wedge(e1, e2);
  for (const auto& p : grid.points)
    CHECK(w12.eval_form2_matrix(p)(0, 1) == doctest::Approx(1.0));

  std::mt19937 rng(41);
  for (int trial = 0; trial < 3; ++trial) {
    TensorField a = random_form(E, 1, rng);
    TensorField b = random_form(E, 1, rng);
    TensorField c = random_form(E, 1, rng);
    TensorField comm = wedge(a, b) + wedge(b, a);  // (-1)^{1*1} = -1
    CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(comm, p); }) < 1e-10);
    TensorField assoc = wedge(wedge(a, b), c) - wedge(a, wedge(b, c));
    CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(assoc, p); }) < 1e-10);
    TensorField ab = wedge(a, b);
    TensorField comm2 = wedge(ab, c) - wedge(c, ab);  // 2-form and 1-form commute
    CHECK(max_over_grid(grid, [&](const Point& p) { return max_abs_form(comm2, p); }) < 1e-10);
  }

  // eta ^ d eta has coefficient 1 on the contact fixture
  TensorField eta = TensorField::one_form(E, {E3("-x2"), E3("0"), E3("1")});
  TensorField top = wedge(eta, exterior_derivative(eta));
  for (const auto& p : grid.points)
    CHECK(top.form_canonical(0).eval(p.coords) == doctest::Approx(1.0));
}

TEST_CASE("degree overflow gives the zero form") {
  auto E = tangent_r3();
  std::mt19937 rng(43);
  TensorField w2 = random_form(E, 2, rng);
  TensorField w = wedge(w2, w2);  // degree 4 > rank 3
  CHECK(w.degree() == 4);
  CHECK(w.form_term_count() == 0);
  TensorField top = random_form(E, 3, rng);
  CHECK(exterior_derivative(top).form_term_count() == 0);
}

TEST_CASE("Nijenhuis tensor: identity and zero vanish, Heisenberg F does not") {
  auto E = tangent_r3();
  auto grid = grid_for(E, 20);
  TensorField I = TensorField::identity_endomorphism(E);
  TensorField NI = nijenhuis(I);
  double worst = 0.0;
  for (const auto& p : grid.points)
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        worst = std::max(worst, NI.eval_vv2(a, b, p).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-14);

  TensorField Z = TensorField::endomorphism(
      E, {{E3("0"), E3("0"), E3("0")}, {E3("0"), E3("0"), E3("0")}, {E3("0"), E3("0"), E3("0")}});
  TensorField NZ = nijenhuis(Z);
  for (const auto& p : grid.points) CHECK(NZ.eval_vv2(0, 1, p).cwiseAbs().maxCoeff() == 0.0);

  // the Heisenberg F has N_F(u1, u2) = xi on the adapted frame
  TensorField NF = nijenhuis(heisenberg_F(E));
  for (const auto& p : grid.points) {
    Eigen::Vector3d u(0, 1, 0), v(1, 0, p[1]);
    Eigen::VectorXd val = Eigen::VectorXd::Zero(3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (u[a] * v[b] != 0.0) val += u[a] * v[b] * NF.eval_vv2(a, b, p);
    CHECK(val[0] == doctest::Approx(0.0));
    CHECK(val[1] == doctest::Approx(0.0));
    CHECK(val[2] == doctest::Approx(1.0));
  }
}

TEST_CASE("Nijenhuis output is function-bilinear") {
  auto E = so3_action();
  auto grid = grid_for(E, 20);
  std::mt19937 rng(47);
  TensorField A = TensorField::endomorphism(
      E,
      {{random_poly(E->chart(), rng), random_poly(E->chart(), rng), random_poly(E->chart(), rng)},
       {random_poly(E->chart(), rng), random_poly(E->chart(), rng), random_poly(E->chart(), rng)},
       {random_poly(E->chart(), rng), random_poly(E->chart(), rng), random_poly(E->chart(), rng)}});
  TensorField NA = nijenhuis(A);
  Expr f = random_poly(E->chart(), rng);
  TensorField s1 = random_section(E, rng);
  TensorField s2 = random_section(E, rng);
  std::vector<Expr> fs1;
  for (int c = 0; c < 3; ++c) fs1.push_back(f * s1.section_component(c));
  TensorField fs1_field = TensorField::section(E, fs1);

  auto eval_NA = [&](const TensorField& u, const TensorField& v, const Point& p) {
    Eigen::VectorXd uu = u.eval_vector(p), vv = v.eval_vector(p);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (uu[a] * vv[b] != 0.0) acc += uu[a] * vv[b] * NA.eval_vv2(a, b, p);
    return acc;
  };
  double worst = 0.0;
  for (const auto& p : grid.points) {
    Eigen::VectorXd lhs = eval_NA(fs1_field, s2, p);
    Eigen::VectorXd rhs = f.eval(p.coords) * eval_NA(s1, s2, p);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("parallel and serial grid scans agree exactly") {
  auto E = so3_action();
  auto grid = grid_for(E, 200);
  std::mt19937 rng(53);
  TensorField w = random_form(E, 1, rng);
  TensorField dw = exterior_derivative(w);
  PointKernel k = [&](const Point& p) {
    double worst = 0.0;
    for (double v : dw.eval_form(p)) worst = std::max(worst, std::abs(v));
    return worst;
  };
  ScanResult serial = scan_grid_serial(grid, k);
  set_parallel_scan(true);
  ScanResult parallel = scan_grid(grid, k);
  CHECK(serial.max_abs == parallel.max_abs);
  CHECK(serial.worst_index == parallel.worst_index);
  CHECK(serial.min_abs == parallel.min_abs);
  CHECK(serial.min_index == parallel.min_index);
}

TEST_CASE("skew structure functions are enforced at construction") {
  Chart c = chart3();
  std::vector<std::vector<Expr>> anchor(3, std::vector<Expr>(3));
  std::vector<std::vector<std::vector<Expr>>> C(
      3, std::vector<std::vector<Expr>>(3, std::vector<Expr>(3)));
  C[0][1][2] = E3("x1");  // C[1][0][2] left zero: not skew
  CHECK_THROWS_AS(make_algebroid(c, 3, std::move(anchor), std::move(C)), std::invalid_argument);
}

TEST_CASE("empty grids are rejected") {
  CHECK_THROWS_AS(SampleGrid(std::vector<Point>{}), std::invalid_argument);
}

TEST_CASE("shape and variance errors") {
  auto E = tangent_r3();
  std::mt19937 rng(59);
  TensorField s = random_section(E, rng);
  // Lie derivative of an unsupported variance
  TensorField N = nijenhuis(heisenberg_F(E));
  CHECK_THROWS_AS(lie_derivative(s, N), std::invalid_argument);
  // mixed-kind arithmetic
  TensorField w = random_form(E, 1, rng);
  CHECK_THROWS_AS(s + w, std::invalid_argument);
  // sections over different algebroids
  auto E2 = tangent_r3();
  CHECK_THROWS_AS(bracket(s, TensorField::frame_section(E2, 0)), std::invalid_argument);
  // component count mismatches
  CHECK_THROWS_AS(TensorField::section(E, {E3("1")}), std::invalid_argument);
  CHECK_THROWS_AS(TensorField::form(E, 2, {E3("1")}), std::invalid_argument);
}
