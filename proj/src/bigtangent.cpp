#include "lalg/bigtangent.hpp"

#include <sstream>
#include <stdexcept>

#include "lalg/combo.hpp"

namespace lalg {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

BigTangentModel build_big_tangent(int n, const std::vector<std::vector<Expr>>& g_base,
                                  const std::vector<std::pair<double, double>>& box) {
  require(n >= 1, "build_big_tangent: n must be positive");
  require(int(g_base.size()) == n, "build_big_tangent: metric shape");
  require(box.size() == static_cast<std::size_t>(3 * n), "build_big_tangent: box must cover (x, y, p)");

  Chart chart;
  for (int i = 1; i <= n; ++i) chart.variables.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) chart.variables.push_back("y" + std::to_string(i));
  for (int i = 1; i <= n; ++i) chart.variables.push_back("p" + std::to_string(i));
  chart.box = box;

  // base-metric positive definiteness probe on the x-part of the box
  {
    std::vector<std::pair<double, double>> xbox(box.begin(), box.begin() + n);
    for (const auto& q : halton_points(xbox, 7, 99)) {
      Eigen::MatrixXd M(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = g_base[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(q.coords);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
      if (es.eigenvalues().minCoeff() <= 0.0) {
        std::ostringstream os;
        os << "build_big_tangent: base metric not positive definite at (";
        for (std::size_t i = 0; i < q.coords.size(); ++i) os << (i ? ", " : "") << q.coords[i];
        os << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }

  BigTangentModel M;
  M.n = n;
  M.g = g_base;
  M.ginv = expr_inverse(g_base);

  auto yvar = [&](int i) { return Expr::variable(n + i, chart.variables[static_cast<std::size_t>(n + i)]); };
  auto pvar = [&](int i) { return Expr::variable(2 * n + i, chart.variables[static_cast<std::size_t>(2 * n + i)]); };

  // vertical algebroid: anchor = inclusion of the fiber directions, C = 0
  int m = 2 * n;
  std::vector<std::vector<Expr>> anchor(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(3 * n)));
  for (int i = 0; i < n; ++i) {
    anchor[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = Expr::constant(1.0);
    anchor[static_cast<std::size_t>(n + i)][static_cast<std::size_t>(2 * n + i)] = Expr::constant(1.0);
  }
  std::vector<std::vector<std::vector<Expr>>> C(
      static_cast<std::size_t>(m), std::vector<std::vector<Expr>>(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m))));
  M.V = make_algebroid(chart, m, std::move(anchor), std::move(C));

  Expr F2, K2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!M.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero())
        F2 = F2 + M.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * yvar(i) * yvar(j);
      if (!M.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero())
        K2 = K2 + M.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * pvar(i) * pvar(j);
    }
  M.F2 = F2;
  M.K2 = K2;
  M.lambda = sqrt(F2 + K2);

  M.y_low.resize(static_cast<std::size_t>(n));
  M.p_up.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr yl, pu;
    for (int j = 0; j < n; ++j) {
      if (!M.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero())
        yl = yl + M.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * yvar(j);
      if (!M.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].is_zero())
        pu = pu + M.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * pvar(j);
    }
    M.y_low[static_cast<std::size_t>(i)] = yl;
    M.p_up[static_cast<std::size_t>(i)] = pu;
  }

  // block metric G = g (+) g^{-1}
  std::vector<std::vector<Expr>> G(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = M.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      G[static_cast<std::size_t>(n + i)][static_cast<std::size_t>(n + j)] = M.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  M.G = BundleMetric{M.V, std::move(G)};

  // phi(d/dy^i) = -g_{ij} d/dp_j , phi(d/dp_i) = g^{ij} d/dy^j
  std::vector<std::vector<Expr>> phi(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      phi[static_cast<std::size_t>(n + j)][static_cast<std::size_t>(i)] = -M.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      phi[static_cast<std::size_t>(j)][static_cast<std::size_t>(n + i)] = M.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  M.phi = TensorField::endomorphism(M.V, std::move(phi));

  std::vector<Expr> xi2(static_cast<std::size_t>(m)), xi1(static_cast<std::size_t>(m));
  std::vector<Expr> w1(static_cast<std::size_t>(m)), w2(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    xi2[static_cast<std::size_t>(i)] = yvar(i) / M.lambda;
    xi2[static_cast<std::size_t>(n + i)] = pvar(i) / M.lambda;
    xi1[static_cast<std::size_t>(i)] = M.p_up[static_cast<std::size_t>(i)] / M.lambda;
    xi1[static_cast<std::size_t>(n + i)] = -M.y_low[static_cast<std::size_t>(i)] / M.lambda;
    w1[static_cast<std::size_t>(i)] = pvar(i) / M.lambda;
    w1[static_cast<std::size_t>(n + i)] = -yvar(i) / M.lambda;
    w2[static_cast<std::size_t>(i)] = M.y_low[static_cast<std::size_t>(i)] / M.lambda;
    w2[static_cast<std::size_t>(n + i)] = M.p_up[static_cast<std::size_t>(i)] / M.lambda;
  }
  M.xi2 = TensorField::section(M.V, std::move(xi2));
  M.xi1 = TensorField::section(M.V, std::move(xi1));
  M.omega1 = TensorField::one_form(M.V, std::move(w1));
  M.omega2 = TensorField::one_form(M.V, std::move(w2));
  return M;
}

SampleGrid big_tangent_grid(const BigTangentModel& model, std::size_t count, unsigned seed,
                            double margin, double tol_eq, double tol_nonzero) {
  const auto& box = model.V->chart().box;
  Expr fk = model.F2 + model.K2;
  auto batch = halton_points(box, count * 50 + 500, seed);
  std::vector<Point> pts;
  for (auto& p : batch) {
    if (fk.eval(p.coords) >= margin) pts.push_back(std::move(p));
    if (pts.size() == count) break;
  }
  if (pts.size() < count)
    throw std::runtime_error("big_tangent_grid: could not find enough points off the zero section");
  return SampleGrid(std::move(pts), tol_eq, tol_nonzero);
}

FramedFStructure framed_f_structure(const BigTangentModel& model, const SampleGrid& grid) {
  const AlgebroidPtr& V = model.V;
  int m = 2 * model.n;
  int n = model.n;
  FramedFStructure out{
      model.phi - outer(model.omega2, model.xi1) + outer(model.omega1, model.xi2), {}};
  const TensorField& f = out.f;
  Report& rep = out.report;

  auto max_abs_matrix = [](const TensorField& T) {
    return [&T](const Point& p) { return T.eval_matrix(p).cwiseAbs().maxCoeff(); };
  };
  auto max_abs_vector = [](const TensorField& T) {
    return [&T](const Point& p) { return T.eval_vector(p).cwiseAbs().maxCoeff(); };
  };

  // lowering identities: y_i y^i = F^2 and p_i p^i = K^2
  {
    auto yv = [&](int i) { return Expr::variable(n + i, V->chart().variables[static_cast<std::size_t>(n + i)]); };
    auto pv = [&](int i) { return Expr::variable(2 * n + i, V->chart().variables[static_cast<std::size_t>(2 * n + i)]); };
    Expr ry, rp;
    for (int i = 0; i < n; ++i) {
      ry = ry + model.y_low[static_cast<std::size_t>(i)] * yv(i);
      rp = rp + model.p_up[static_cast<std::size_t>(i)] * pv(i);
    }
    ry = ry - model.F2;
    rp = rp - model.K2;
    rep.entries.push_back(check_max(
        "index_lowering_identities", grid,
        [ry, rp](const Point& p) {
          return std::max(std::abs(ry.eval(p.coords)), std::abs(rp.eval(p.coords)));
        },
        grid.tol_eq));
  }

  // Lemma: phi(xi_1) = -xi_2, phi(xi_2) = xi_1
  rep.entries.push_back(check_max("phi_xi1_is_minus_xi2", grid,
                                  max_abs_vector(apply_endo(model.phi, model.xi1) + model.xi2),
                                  grid.tol_eq));
  rep.entries.push_back(check_max("phi_xi2_is_xi1", grid,
                                  max_abs_vector(apply_endo(model.phi, model.xi2) - model.xi1),
                                  grid.tol_eq));
  // omega^1 o phi = omega^2, omega^2 o phi = -omega^1
  {
    std::vector<Expr> w1phi(static_cast<std::size_t>(m)), w2phi(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      Expr acc1, acc2;
      for (int b = 0; b < m; ++b) {
        acc1 = acc1 + model.omega1.form_canonical(b) * model.phi.endo_component(b, a);
        acc2 = acc2 + model.omega2.form_canonical(b) * model.phi.endo_component(b, a);
      }
      w1phi[static_cast<std::size_t>(a)] = acc1;
      w2phi[static_cast<std::size_t>(a)] = acc2;
    }
    TensorField r1 = TensorField::one_form(V, std::move(w1phi)) - model.omega2;
    TensorField r2 = TensorField::one_form(V, std::move(w2phi)) + model.omega1;
    rep.entries.push_back(check_max("omega1_circ_phi_is_omega2", grid, max_abs_vector(r1), grid.tol_eq));
    rep.entries.push_back(check_max("omega2_circ_phi_is_minus_omega1", grid, max_abs_vector(r2), grid.tol_eq));
  }
  // omega^a = G(., xi_a)
  rep.entries.push_back(check_max(
      "omega1_metric_dual_of_xi1", grid,
      max_abs_vector(model.omega1 - lower_index(model.G.as_cov2(), model.xi1)), grid.tol_eq));
  rep.entries.push_back(check_max(
      "omega2_metric_dual_of_xi2", grid,
      max_abs_vector(model.omega2 - lower_index(model.G.as_cov2(), model.xi2)), grid.tol_eq));

  // framed-structure identities
  {
    Expr d11 = pair_form_section(model.omega1, model.xi1) - Expr::constant(1.0);
    Expr d22 = pair_form_section(model.omega2, model.xi2) - Expr::constant(1.0);
    Expr d12 = pair_form_section(model.omega1, model.xi2);
    Expr d21 = pair_form_section(model.omega2, model.xi1);
    rep.entries.push_back(check_max(
        "framed_omega_xi_pairings", grid,
        [&](const Point& p) {
          return std::max({std::abs(d11.eval(p.coords)), std::abs(d22.eval(p.coords)),
                           std::abs(d12.eval(p.coords)), std::abs(d21.eval(p.coords))});
        },
        grid.tol_eq));
  }
  rep.entries.push_back(
      check_max("framed_f_kills_xi1", grid, max_abs_vector(apply_endo(f, model.xi1)), grid.tol_eq));
  rep.entries.push_back(
      check_max("framed_f_kills_xi2", grid, max_abs_vector(apply_endo(f, model.xi2)), grid.tol_eq));
  {
    std::vector<Expr> w1f(static_cast<std::size_t>(m)), w2f(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      Expr acc1, acc2;
      for (int b = 0; b < m; ++b) {
        acc1 = acc1 + model.omega1.form_canonical(b) * f.endo_component(b, a);
        acc2 = acc2 + model.omega2.form_canonical(b) * f.endo_component(b, a);
      }
      w1f[static_cast<std::size_t>(a)] = acc1;
      w2f[static_cast<std::size_t>(a)] = acc2;
    }
    rep.entries.push_back(check_max(
        "framed_omega_circ_f_zero", grid,
        [r1 = TensorField::one_form(V, std::move(w1f)),
         r2 = TensorField::one_form(V, std::move(w2f))](const Point& p) {
          return std::max(r1.eval_vector(p).cwiseAbs().maxCoeff(),
                          r2.eval_vector(p).cwiseAbs().maxCoeff());
        },
        grid.tol_eq));
  }
  {
    TensorField f2 = compose_endo(f, f);
    TensorField res = f2 + TensorField::identity_endomorphism(V) -
                      outer(model.omega1, model.xi1) - outer(model.omega2, model.xi2);
    rep.entries.push_back(check_max("framed_f_squared_identity", grid, max_abs_matrix(res), grid.tol_eq));
    TensorField res3 = compose_endo(f2, f) + f;
    rep.entries.push_back(check_max("framed_f_cubed_plus_f", grid, max_abs_matrix(res3), grid.tol_eq));
  }
  {
    const double rank_tol = 1e-7;
    rep.entries.push_back(check_max(
        "framed_rank_f_small_svs", grid,
        [&](const Point& p) {
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.eval_matrix(p));
          const auto& sv = svd.singularValues();
          return std::max(sv[m - 1], sv[m - 2]);  // two smallest must vanish
        },
        rank_tol));
    if (n >= 2) {
      rep.entries.push_back(check_nonzero(
          "framed_rank_f_large_svs", grid,
          [&](const Point& p) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.eval_matrix(p));
            return svd.singularValues()[m - 3];  // (2n-2)-th largest stays away from zero
          },
          rank_tol));
    }
  }
  // G(fX, fY) = G(X,Y) - omega^1(X)omega^1(Y) - omega^2(X)omega^2(Y)
  rep.entries.push_back(check_max(
      "framed_metric_identity", grid,
      [&, f](const Point& p) {
        Eigen::MatrixXd Fm = f.eval_matrix(p);
        Eigen::MatrixXd G = model.G.eval(p);
        Eigen::VectorXd o1 = model.omega1.eval_vector(p);
        Eigen::VectorXd o2 = model.omega2.eval_vector(p);
        Eigen::MatrixXd res = Fm.transpose() * G * Fm - G + o1 * o1.transpose() + o2 * o2.transpose();
        return res.cwiseAbs().maxCoeff();
      },
      grid.tol_eq));
  // local components of f (both blocks)
  {
    Expr L2 = model.F2 + model.K2;
    std::vector<std::vector<Expr>> expect(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
    auto yv = [&](int i) { return Expr::variable(n + i, V->chart().variables[static_cast<std::size_t>(n + i)]); };
    auto pv = [&](int i) { return Expr::variable(2 * n + i, V->chart().variables[static_cast<std::size_t>(2 * n + i)]); };
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // f(d/dy^i) = (p_i y^j - y_i p^j)/L2 d/dy^j - (g_ij - (y_i y_j + p_i p_j)/L2) d/dp_j
        expect[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] =
            (pv(i) * yv(j) - model.y_low[static_cast<std::size_t>(i)] * model.p_up[static_cast<std::size_t>(j)]) / L2;
        expect[static_cast<std::size_t>(n + j)][static_cast<std::size_t>(i)] =
            (model.y_low[static_cast<std::size_t>(i)] * model.y_low[static_cast<std::size_t>(j)] + pv(i) * pv(j)) / L2 -
            model.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        // f(d/dp_i) = (g^{ij} - (p^i p^j + y^i y^j)/L2) d/dy^j + (p^i y_j - y^i p_j)/L2 d/dp_j
        expect[static_cast<std::size_t>(j)][static_cast<std::size_t>(n + i)] =
            model.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
            (model.p_up[static_cast<std::size_t>(i)] * model.p_up[static_cast<std::size_t>(j)] + yv(i) * yv(j)) / L2;
        expect[static_cast<std::size_t>(n + j)][static_cast<std::size_t>(n + i)] =
            (model.p_up[static_cast<std::size_t>(i)] * model.y_low[static_cast<std::size_t>(j)] - yv(i) * pv(j)) / L2;
      }
    TensorField res = f - TensorField::endomorphism(V, std::move(expect));
    rep.entries.push_back(
        check_max("f_local_components", grid, max_abs_matrix(res), grid.tol_eq));
  }
  // the three displayed blocks of G(f., f.)
  {
    Expr L2 = model.F2 + model.K2;
    auto yv = [&](int i) { return Expr::variable(n + i, V->chart().variables[static_cast<std::size_t>(n + i)]); };
    auto pv = [&](int i) { return Expr::variable(2 * n + i, V->chart().variables[static_cast<std::size_t>(2 * n + i)]); };
    std::vector<Expr> residuals;
    TensorField Gcov = model.G.as_cov2();
    std::vector<TensorField> fe;
    for (int a = 0; a < m; ++a) fe.push_back(apply_endo(f, TensorField::frame_section(V, a)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Expr yy = model.g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                  (model.y_low[static_cast<std::size_t>(i)] * model.y_low[static_cast<std::size_t>(j)] +
                   pv(i) * pv(j)) / L2;
        residuals.push_back(bilinear(Gcov, fe[static_cast<std::size_t>(i)], fe[static_cast<std::size_t>(j)]) - yy);
        Expr yp = (pv(i) * yv(j) - model.y_low[static_cast<std::size_t>(i)] *
                                       model.p_up[static_cast<std::size_t>(j)]) / L2;
        residuals.push_back(
            bilinear(Gcov, fe[static_cast<std::size_t>(i)], fe[static_cast<std::size_t>(n + j)]) - yp);
        Expr pp = model.ginv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                  (yv(i) * yv(j) + model.p_up[static_cast<std::size_t>(i)] *
                                       model.p_up[static_cast<std::size_t>(j)]) / L2;
        residuals.push_back(
            bilinear(Gcov, fe[static_cast<std::size_t>(n + i)], fe[static_cast<std::size_t>(n + j)]) - pp);
      }
    rep.entries.push_back(check_max(
        "f_metric_blocks", grid,
        [residuals](const Point& p) {
          double worst = 0.0;
          for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
          return worst;
        },
        grid.tol_eq));
  }
  return out;
}

PhiFormResult phi_form_and_decomposition(const BigTangentModel& model, const SampleGrid& grid) {
  const AlgebroidPtr& V = model.V;
  int n = model.n;
  int m = 2 * n;
  TensorField f = model.phi - outer(model.omega2, model.xi1) + outer(model.omega1, model.xi2);

  // Phi(e_a, e_b) = G(f(e_a), e_b)
  std::vector<std::vector<Expr>> phi_vals(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Expr acc;
      for (int c = 0; c < m; ++c) {
        const Expr& fc = f.endo_component(c, a);
        if (!fc.is_zero()) acc = acc + fc * model.G(c, b);
      }
      phi_vals[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = acc;
    }

  PhiFormResult out{TensorField::form2(V, phi_vals), {}};
  Report& rep = out.report;

  rep.entries.push_back(check_max(
      "Phi_antisymmetric", grid,
      [&](const Point& p) {
        Eigen::MatrixXd M(m, m);
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            M(a, b) = phi_vals[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].eval(p.coords);
        return (M + M.transpose()).cwiseAbs().maxCoeff();
      },
      grid.tol_eq));

  Expr L2 = model.F2 + model.K2;
  auto yv = [&](int i) { return Expr::variable(n + i, V->chart().variables[static_cast<std::size_t>(n + i)]); };
  auto pv = [&](int i) { return Expr::variable(2 * n + i, V->chart().variables[static_cast<std::size_t>(2 * n + i)]); };

  // displayed components of Phi
  {
    std::vector<Expr> residuals;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Expr yy = (pv(i) * model.y_low[static_cast<std::size_t>(j)] - model.y_low[static_cast<std::size_t>(i)] * pv(j)) / L2;
        residuals.push_back(out.Phi.form_component({i, j}) - yy);
        Expr yp = (model.y_low[static_cast<std::size_t>(i)] * yv(j) + pv(i) * model.p_up[static_cast<std::size_t>(j)]) / L2;
        if (i == j) yp = yp - Expr::constant(1.0);
        residuals.push_back(out.Phi.form_component({i, n + j}) - yp);
        Expr pp = (model.p_up[static_cast<std::size_t>(i)] * yv(j) - yv(i) * model.p_up[static_cast<std::size_t>(j)]) / L2;
        residuals.push_back(out.Phi.form_component({n + i, n + j}) - pp);
      }
    rep.entries.push_back(check_max(
        "Phi_local_components", grid,
        [residuals](const Point& p) {
          double worst = 0.0;
          for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
          return worst;
        },
        grid.tol_eq));
  }

  // d_V omega^1 in the half convention matches the displayed components
  TensorField dw1_half = exterior_derivative(model.omega1, DConvention::Half);
  {
    std::vector<Expr> residuals;
    Expr two_l3 = Expr::constant(2.0) * L2 * model.lambda;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Expr yy = (pv(i) * model.y_low[static_cast<std::size_t>(j)] - model.y_low[static_cast<std::size_t>(i)] * pv(j)) / two_l3;
        residuals.push_back(dw1_half.form_component({i, j}) - yy);
        Expr pp = (model.p_up[static_cast<std::size_t>(i)] * yv(j) - yv(i) * model.p_up[static_cast<std::size_t>(j)]) / two_l3;
        residuals.push_back(dw1_half.form_component({n + i, n + j}) - pp);
        Expr yp = (Expr::constant(-2.0) * (i == j ? Expr::constant(1.0) : Expr()) +
                   (model.y_low[static_cast<std::size_t>(i)] * yv(j) + pv(i) * model.p_up[static_cast<std::size_t>(j)]) / L2) /
                  (Expr::constant(2.0) * model.lambda);
        residuals.push_back(dw1_half.form_component({i, n + j}) - yp);
      }
    rep.entries.push_back(check_max(
        "dV_omega1_components_half", grid,
        [residuals](const Point& p) {
          double worst = 0.0;
          for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
          return worst;
        },
        grid.tol_eq));
  }

  // Phi = 2 lambda d_V omega^1 + theta^i ^ k_i (d_V in the half convention)
  {
    std::vector<std::vector<Expr>> theta_k(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
    for (int i = 0; i < n; ++i) theta_k[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = Expr::constant(1.0);
    TensorField varphi = TensorField::form2(V, theta_k);
    TensorField res = out.Phi - dw1_half.scaled(Expr::constant(2.0) * model.lambda) - varphi;
    rep.entries.push_back(check_max(
        "Phi_decomposition", grid,
        [res](const Point& p) {
          double worst = 0.0;
          for (double v : res.eval_form(p)) worst = std::max(worst, std::abs(v));
          return worst;
        },
        grid.tol_eq));
  }

  // annihilator of Phi is exactly span{xi_1, xi_2}
  rep.entries.push_back(check_max(
      "Phi_annihilator_contains_xi", grid,
      [&](const Point& p) {
        Eigen::MatrixXd W = out.Phi.eval_form2_matrix(p);
        double r1 = (W * model.xi1.eval_vector(p)).cwiseAbs().maxCoeff();
        double r2 = (W * model.xi2.eval_vector(p)).cwiseAbs().maxCoeff();
        return std::max(r1, r2);
      },
      grid.tol_eq));
  rep.entries.push_back(check_max(
      "Phi_annihilator_dimension_two", grid,
      [&](const Point& p) {
        Eigen::MatrixXd W = out.Phi.eval_form2_matrix(p);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
        const auto& sv = svd.singularValues();
        double small = std::max(sv[m - 1], sv[m - 2]);
        if (m >= 3 && sv[m - 3] < 1e-7) small = 1.0;  // nullspace larger than two
        return small;
      },
      1e-7));

  // [xi_1, xi_2] = xi_1 / sqrt(F^2+K^2)
  {
    TensorField br = bracket(model.xi1, model.xi2);
    TensorField res = br - model.xi1.scaled(Expr::constant(1.0) / model.lambda);
    rep.entries.push_back(check_max(
        "bracket_xi1_xi2", grid,
        [res](const Point& p) { return res.eval_vector(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));
  }
  return out;
}

LiouvilleRestriction liouville_restriction(const BigTangentModel& model, const SampleGrid& grid) {
  const AlgebroidPtr& V = model.V;
  int n = model.n;
  int m = 2 * n;

  LiouvilleRestriction out{
      TensorField::identity_endomorphism(V) - outer(model.omega2, model.xi2),
      {},
      TensorField::identity_endomorphism(V),  // placeholder, set below
      model.xi1,
      model.omega1,
      {}};
  const TensorField& P = out.P;
  TensorField f = model.phi - outer(model.omega2, model.xi1) + outer(model.omega1, model.xi2);
  out.f_bar = compose_endo(f, P);

  for (int a = 0; a < m; ++a)
    out.restricted_frame.push_back(apply_endo(P, TensorField::frame_section(V, a)));

  Report& rep = out.report;
  // the a5 component formulas for P
  {
    Expr L2 = model.F2 + model.K2;
    auto yv = [&](int i) { return Expr::variable(n + i, V->chart().variables[static_cast<std::size_t>(n + i)]); };
    auto pv = [&](int i) { return Expr::variable(2 * n + i, V->chart().variables[static_cast<std::size_t>(2 * n + i)]); };
    std::vector<std::vector<Expr>> expect(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Expr d = i == j ? Expr::constant(1.0) : Expr();
        expect[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d - model.y_low[static_cast<std::size_t>(j)] * yv(i) / L2;
        expect[static_cast<std::size_t>(n + i)][static_cast<std::size_t>(n + j)] = d - model.p_up[static_cast<std::size_t>(j)] * pv(i) / L2;
        expect[static_cast<std::size_t>(n + i)][static_cast<std::size_t>(j)] = -model.y_low[static_cast<std::size_t>(j)] * pv(i) / L2;
        expect[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + j)] = -model.p_up[static_cast<std::size_t>(j)] * yv(i) / L2;
      }
    TensorField res = P - TensorField::endomorphism(V, std::move(expect));
    rep.entries.push_back(check_max(
        "projector_local_components", grid,
        [res](const Point& p) { return res.eval_matrix(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));
  }
  {
    TensorField res = compose_endo(P, P) - P;
    rep.entries.push_back(check_max(
        "P_idempotent", grid,
        [res](const Point& p) { return res.eval_matrix(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));
  }
  rep.entries.push_back(check_max(
      "P_xi2_zero_P_xi1_fixed", grid,
      [&](const Point& p) {
        double r1 = apply_endo(P, model.xi2).eval_vector(p).cwiseAbs().maxCoeff();
        double r2 =
            (apply_endo(P, model.xi1) - model.xi1).eval_vector(p).cwiseAbs().maxCoeff();
        return std::max(r1, r2);
      },
      grid.tol_eq));
  // a3: G(X, PY) = G(PX, PY) = G(X,Y) - omega^2(X) omega^2(Y)
  rep.entries.push_back(check_max(
      "metric_projection_identity", grid,
      [&](const Point& p) {
        Eigen::MatrixXd G = model.G.eval(p);
        Eigen::MatrixXd Pm = P.eval_matrix(p);
        Eigen::VectorXd o2 = model.omega2.eval_vector(p);
        Eigen::MatrixXd target = G - o2 * o2.transpose();
        double r1 = (G * Pm - target).cwiseAbs().maxCoeff();
        double r2 = (Pm.transpose() * G * Pm - target).cwiseAbs().maxCoeff();
        return std::max(r1, r2);
      },
      grid.tol_eq));
  // omega^2 o P = 0
  {
    std::vector<Expr> comps(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      Expr acc;
      for (int b = 0; b < m; ++b)
        acc = acc + model.omega2.form_canonical(b) * P.endo_component(b, a);
      comps[static_cast<std::size_t>(a)] = acc;
    }
    TensorField res = TensorField::one_form(V, std::move(comps));
    rep.entries.push_back(check_max(
        "omega2_circ_P_zero", grid,
        [res](const Point& p) { return res.eval_vector(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));
  }
  // integrability: brackets of projected frame fields stay in ker omega^2
  {
    std::vector<Expr> residuals;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        TensorField br = bracket(out.restricted_frame[static_cast<std::size_t>(a)],
                                 out.restricted_frame[static_cast<std::size_t>(b)]);
        residuals.push_back(pair_form_section(model.omega2, br));
      }
    rep.entries.push_back(check_max(
        "integrability_brackets_tangent", grid,
        [residuals](const Point& p) {
          double worst = 0.0;
          for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
          return worst;
        },
        grid.tol_eq));
  }
  // restricted tensor stays tangent: G(f_bar X, xi_2) = 0
  {
    std::vector<Expr> comps(static_cast<std::size_t>(m));
    TensorField Gxi2 = lower_index(model.G.as_cov2(), model.xi2);
    for (int a = 0; a < m; ++a) {
      Expr acc;
      for (int b = 0; b < m; ++b)
        acc = acc + Gxi2.form_canonical(b) * out.f_bar.endo_component(b, a);
      comps[static_cast<std::size_t>(a)] = acc;
    }
    TensorField res = TensorField::one_form(V, std::move(comps));
    rep.entries.push_back(check_max(
        "f_bar_tangent_to_restriction", grid,
        [res](const Point& p) { return res.eval_vector(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));
  }
  // On the distribution the correction form satisfies varphi = -Phi (it only
  // vanishes in the degenerate n = 1 case); this is what reconciles the
  // decomposition of Phi with d_bar eta_bar = Phi_bar / sqrt(F^2 + K^2).
  {
    std::vector<std::vector<Expr>> theta_k(static_cast<std::size_t>(m),
                                           std::vector<Expr>(static_cast<std::size_t>(m)));
    for (int i = 0; i < n; ++i)
      theta_k[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + i)] = Expr::constant(1.0);
    TensorField varphi = TensorField::form2(V, theta_k);
    TensorField Gcov = model.G.as_cov2();
    std::vector<Expr> residuals;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        Expr acc;
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) {
            Expr w = varphi.form_component({c, d});
            if (!w.is_zero()) acc = acc + w * P.endo_component(c, a) * P.endo_component(d, b);
          }
        Expr phibar = bilinear(Gcov, apply_endo(out.f_bar, out.restricted_frame[static_cast<std::size_t>(a)]),
                               out.restricted_frame[static_cast<std::size_t>(b)]);
        residuals.push_back(acc + phibar);
      }
    rep.entries.push_back(check_max(
        "varphi_restriction_equals_minus_Phi_bar", grid,
        [residuals](const Point& p) {
          double worst = 0.0;
          for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
          return worst;
        },
        grid.tol_eq));
  }
  return out;
}

Report verify_contact_on_restriction(const BigTangentModel& model,
                                     const LiouvilleRestriction& restriction,
                                     const SampleGrid& grid) {
  const AlgebroidPtr& V = model.V;
  int n = model.n;
  int m = 2 * n;
  const TensorField& fb = restriction.f_bar;
  const TensorField& P = restriction.P;
  Report rep;

  // Thm: almost contact identities of (f_bar, xi_1, omega^1) on the restriction
  {
    TensorField fb2 = compose_endo(fb, fb);
    TensorField fb3pf = compose_endo(fb2, fb) + fb;
    rep.entries.push_back(check_max(
        "restricted_f_cubed_plus_f", grid,
        [fb3pf](const Point& p) { return fb3pf.eval_matrix(p).cwiseAbs().maxCoeff(); },
        grid.tol_eq));
    // f_bar^2 = -I + eta_bar (x) xi_bar on the restricted frame
    TensorField correction = compose_endo(outer(restriction.eta_bar, restriction.xi_bar), P);
    TensorField total = compose_endo(fb2, P) + P - correction;
    rep.entries.push_back(check_max(
        "restricted_f_squared_identity", grid,
        [total](const Point& p) { return total.eval_matrix(p).cwiseAbs().maxCoeff(); },
        grid.tol_eq));
  }
  {
    Expr pairing = pair_form_section(restriction.eta_bar, restriction.xi_bar) - Expr::constant(1.0);
    rep.entries.push_back(check_max(
        "restricted_eta_xi_pairing_one", grid,
        [pairing](const Point& p) { return std::abs(pairing.eval(p.coords)); }, grid.tol_eq));
  }
  rep.entries.push_back(check_max(
      "restricted_f_kills_xi", grid,
      [&](const Point& p) {
        return apply_endo(fb, restriction.xi_bar).eval_vector(p).cwiseAbs().maxCoeff();
      },
      grid.tol_eq));
  {
    std::vector<Expr> comps(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      Expr acc;
      for (int b = 0; b < m; ++b)
        acc = acc + restriction.eta_bar.form_canonical(b) * fb.endo_component(b, a);
      comps[static_cast<std::size_t>(a)] = acc;
    }
    TensorField res = TensorField::one_form(V, std::move(comps));
    rep.entries.push_back(check_max(
        "restricted_eta_circ_f", grid,
        [res](const Point& p) { return res.eval_vector(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));
  }
  {
    const double rank_tol = 1e-7;
    rep.entries.push_back(check_max(
        "restricted_rank_f_small_svs", grid,
        [&](const Point& p) {
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(fb.eval_matrix(p));
          const auto& sv = svd.singularValues();
          return std::max(sv[m - 1], sv[m - 2]);
        },
        rank_tol));
    if (n >= 2) {
      rep.entries.push_back(check_nonzero(
          "restricted_rank_f_large_svs", grid,
          [&](const Point& p) {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(fb.eval_matrix(p));
            return svd.singularValues()[m - 3];
          },
          rank_tol));
    }
  }
  // thacs / V7: G(f_bar X, f_bar Y) = G(X, Y) - eta_bar(X) eta_bar(Y) on the frame
  rep.entries.push_back(check_max(
      "restricted_metric_identity", grid,
      [&](const Point& p) {
        Eigen::MatrixXd G = model.G.eval(p);
        Eigen::MatrixXd Pm = P.eval_matrix(p);
        Eigen::MatrixXd Fb = fb.eval_matrix(p);
        Eigen::VectorXd eb = restriction.eta_bar.eval_vector(p);
        Eigen::VectorXd ebP = Pm.transpose() * eb;
        Eigen::MatrixXd lhs = (Fb * Pm).transpose() * G * (Fb * Pm);
        Eigen::MatrixXd rhs = Pm.transpose() * G * Pm - ebP * ebP.transpose();
        return (lhs - rhs).cwiseAbs().maxCoeff();
      },
      grid.tol_eq));

  // d_bar eta_bar on the restricted frame (half convention) against
  // Phi_bar / sqrt(F^2 + K^2), componentwise (the V9 vs V10-V12 comparison).
  {
    std::vector<Expr> residuals;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        const TensorField& A = restriction.restricted_frame[static_cast<std::size_t>(a)];
        const TensorField& B = restriction.restricted_frame[static_cast<std::size_t>(b)];
        Expr dbar = Expr::constant(0.5) *
                    (anchor_apply_expr(A, pair_form_section(restriction.eta_bar, B)) -
                     anchor_apply_expr(B, pair_form_section(restriction.eta_bar, A)) -
                     pair_form_section(restriction.eta_bar, bracket(A, B)));
        Expr phibar = bilinear(model.G.as_cov2(), apply_endo(fb, A), B);
        residuals.push_back(dbar * model.lambda - phibar);
      }
    rep.entries.push_back(check_max(
        "dbar_eta_equals_Phi_bar_over_lambda", grid,
        [residuals](const Point& p) {
          double worst = 0.0;
          for (const auto& r : residuals) worst = std::max(worst, std::abs(r.eval(p.coords)));
          return worst;
        },
        grid.tol_eq));
  }

  // nondegeneracy of the restricted contact form: evaluate the ambient
  // (2n-1)-form eta_bar ^ (d_bar eta_bar)^{n-1} on an orthonormal basis of
  // the distribution at each point.
  {
    TensorField dw1_half = exterior_derivative(model.omega1, DConvention::Half);
    TensorField top = restriction.eta_bar;
    for (int k = 0; k < n - 1; ++k) top = wedge(top, dw1_half);
    rep.entries.push_back(check_nonzero(
        "contact_form_nondegenerate_on_restriction", grid,
        [&, top](const Point& p) {
          Eigen::MatrixXd G = model.G.eval(p);
          Eigen::VectorXd xi2 = model.xi2.eval_vector(p);
          // G-orthonormal basis of the complement of xi_2
          std::vector<Eigen::VectorXd> basis;
          basis.push_back(xi2 / std::sqrt(double(xi2.transpose() * G * xi2)));
          std::vector<Eigen::VectorXd> complement;
          for (int seed = 0; seed < m && int(complement.size()) < m - 1; ++seed) {
            Eigen::VectorXd v = Eigen::VectorXd::Unit(m, seed);
            for (const auto& u : basis) v -= double(u.transpose() * G * v) * u;
            for (const auto& u : complement) v -= double(u.transpose() * G * v) * u;
            double n2 = v.transpose() * G * v;
            if (n2 < 1e-12) continue;
            complement.push_back(v / std::sqrt(n2));
          }
          if (int(complement.size()) != m - 1) return 0.0;
          std::vector<double> vals = top.eval_form(p);
          return std::abs(form_value(vals, m, m - 1, complement));
        },
        grid.tol_nonzero));
  }
  return rep;
}

}  // namespace lalg
