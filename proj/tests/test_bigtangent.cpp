#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lalg/bigtangent.hpp"

using namespace lalg;

namespace {

std::vector<std::vector<Expr>> base_metric(int n, bool curved) {
  std::vector<std::string> xvars;
  for (int i = 1; i <= n; ++i) xvars.push_back("x" + std::to_string(i));
  auto e = [&](const std::string& s) { return parse_expr(s, xvars); };
  std::vector<std::vector<Expr>> g(static_cast<std::size_t>(n),
                                   std::vector<Expr>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = e("1");
  if (curved) g[0][0] = e("1 + x1^2");
  return g;
}

BigTangentModel model_for(int n, bool curved) {
  std::vector<std::pair<double, double>> box(static_cast<std::size_t>(3 * n), {-1.5, 1.5});
  return build_big_tangent(n, base_metric(n, curved), box);
}

}  // namespace

TEST_CASE("n = 1 Liouville sections have the expected components") {
  BigTangentModel M = model_for(1, false);
  SampleGrid grid = big_tangent_grid(M, 20, 3);
  for (const auto& p : grid.points) {
    double y = p[1], q = p[2];
    double lambda = std::sqrt(y * y + q * q);
    Eigen::VectorXd xi2 = M.xi2.eval_vector(p);
    CHECK(xi2[0] == doctest::Approx(y / lambda));
    CHECK(xi2[1] == doctest::Approx(q / lambda));
    Eigen::VectorXd xi1 = M.xi1.eval_vector(p);
    CHECK(xi1[0] == doctest::Approx(q / lambda));
    CHECK(xi1[1] == doctest::Approx(-y / lambda));
  }
}

TEST_CASE("phi is an isometric almost complex structure on the vertical bundle") {
  for (bool curved : {false, true}) {
    BigTangentModel M = model_for(2, curved);
    SampleGrid grid = big_tangent_grid(M, 30, 5);
    TensorField phi2 = compose_endo(M.phi, M.phi) +
                       TensorField::identity_endomorphism(M.V);
    double worst = 0.0;
    for (const auto& p : grid.points) {
      worst = std::max(worst, phi2.eval_matrix(p).cwiseAbs().maxCoeff());
      Eigen::MatrixXd G = M.G.eval(p);
      Eigen::MatrixXd Ph = M.phi.eval_matrix(p);
      worst = std::max(worst, (Ph.transpose() * G * Ph - G).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
    // the vertical algebroid itself is valid and phi is integrable
    CHECK(validate(*M.V, grid).all_pass());
    double nphi = 0.0;
    TensorField N = nijenhuis(M.phi);
    for (const auto& p : grid.points)
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          nphi = std::max(nphi, N.eval_vv2(a, b, p).cwiseAbs().maxCoeff());
    CHECK(nphi < 1e-10);
  }
}

TEST_CASE("framed structure identities for n = 1") {
  BigTangentModel M = model_for(1, false);
  SampleGrid grid = big_tangent_grid(M, 25, 7);
  FramedFStructure f = framed_f_structure(M, grid);
  CHECK(f.report.all_pass());
  // at n = 1 the operator f vanishes identically (rank 2n - 2 = 0)
  for (const auto& p : grid.points)
    CHECK(f.f.eval_matrix(p).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("framed structure identities for n = 2, flat and curved") {
  for (bool curved : {false, true}) {
    BigTangentModel M = model_for(2, curved);
    SampleGrid grid = big_tangent_grid(M, 40, 9);
    FramedFStructure f = framed_f_structure(M, grid);
    CHECK(f.report.all_pass());
  }
}

TEST_CASE("rank of f at a hand-picked point") {
  BigTangentModel M = model_for(2, false);
  // (x, y, p) with y = (1, 0), p = (0, 1)
  Point p(std::vector<double>{0.3, -0.2, 1.0, 0.0, 0.0, 1.0});
  FramedFStructure f{TensorField::identity_endomorphism(M.V), {}};
  f.f = M.phi - outer(M.omega2, M.xi1) + outer(M.omega1, M.xi2);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.f.eval_matrix(p));
  const auto& sv = svd.singularValues();
  CHECK(sv[0] > 0.5);
  CHECK(sv[1] > 0.5);
  CHECK(sv[2] < 1e-12);
  CHECK(sv[3] < 1e-12);
}

TEST_CASE("Phi components and decomposition for n = 1") {
  BigTangentModel M = model_for(1, false);
  SampleGrid grid = big_tangent_grid(M, 25, 11);
  PhiFormResult r = phi_form_and_decomposition(M, grid);
  CHECK(r.report.all_pass());
  // at n = 1: Phi(d/dy, d/dp) = -1 + (y^2 + p^2)/(F^2 + K^2) = 0
  for (const auto& p : grid.points)
    CHECK(std::abs(r.Phi.form_canonical(0).eval(p.coords)) < 1e-12);
}

TEST_CASE("Phi components and decomposition for n = 2, flat and curved") {
  for (bool curved : {false, true}) {
    BigTangentModel M = model_for(2, curved);
    SampleGrid grid = big_tangent_grid(M, 40, 13);
    PhiFormResult r = phi_form_and_decomposition(M, grid);
    CHECK(r.report.all_pass());
  }
}

TEST_CASE("Liouville restriction for n = 2, flat and curved") {
  for (bool curved : {false, true}) {
    BigTangentModel M = model_for(2, curved);
    SampleGrid grid = big_tangent_grid(M, 35, 15);
    LiouvilleRestriction rest = liouville_restriction(M, grid);
    CHECK(rest.report.all_pass());
    Report contact = verify_contact_on_restriction(M, rest, grid);
    CHECK(contact.all_pass());
  }
}

TEST_CASE("grids avoid the zero section") {
  BigTangentModel M = model_for(2, false);
  SampleGrid grid = big_tangent_grid(M, 60, 17, 0.5);
  Expr fk = M.F2 + M.K2;
  for (const auto& p : grid.points) CHECK(fk.eval(p.coords) >= 0.5);
}

TEST_CASE("non-positive base metrics are rejected") {
  std::vector<std::string> xvars = {"x1", "x2"};
  auto e = [&](const std::string& s) { return parse_expr(s, xvars); };
  std::vector<std::vector<Expr>> g = {{e("x1"), e("0")}, {e("0"), e("1")}};
  std::vector<std::pair<double, double>> box(6, {-1.5, 1.5});
  CHECK_THROWS_AS(build_big_tangent(2, g, box), std::invalid_argument);
}
