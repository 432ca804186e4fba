#include "lalg/riemann.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "lalg/combo.hpp"

namespace lalg {

Eigen::MatrixXd BundleMetric::eval(const Point& p) const {
  int m = owner->rank();
  Eigen::MatrixXd G(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) G(a, b) = comps[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].eval(p.coords);
  return G;
}

TensorField BundleMetric::as_cov2() const { return TensorField::covariant2(owner, comps); }

BundleMetric BundleMetric::euclidean(AlgebroidPtr E) {
  int m = E->rank();
  std::vector<std::vector<Expr>> g(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a) g[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = Expr::constant(1.0);
  return BundleMetric{std::move(E), std::move(g)};
}

CheckResult check_positive_definite(const BundleMetric& g, const SampleGrid& grid) {
  return check_nonzero(
      "metric_positive_definite", grid,
      [&](const Point& p) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.eval(p));
        double lo = es.eigenvalues().minCoeff();
        return lo > 0.0 ? lo : 0.0;  // negative eigenvalues count as failure
      },
      0.0);
}

Connection::Connection(AlgebroidPtr E, BundleMetric g) : E_(std::move(E)), g_(std::move(g)) {
  int m = E_->rank();
  dg_.assign(static_cast<std::size_t>(m),
             std::vector<std::vector<Expr>>(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m))));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        dg_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] = E_->rho_frame_apply(a, g_(b, c));
}

Connection levi_civita(AlgebroidPtr E, BundleMetric g) { return Connection(std::move(E), std::move(g)); }

Christoffels Connection::christoffels_at(const Point& p) const {
  int m = E_->rank();
  Eigen::MatrixXd G = g_.eval(p);
  Eigen::LDLT<Eigen::MatrixXd> solver(G);
  if (solver.info() != Eigen::Success || !solver.isPositive())
    throw std::runtime_error("levi_civita: metric is singular or not positive definite at a grid point");

  // numeric dg[a](b,c) and C^c_{ab}
  std::vector<Eigen::MatrixXd> dg(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    Eigen::MatrixXd M(m, m);
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        M(b, c) = dg_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][static_cast<std::size_t>(c)].eval(p.coords);
    dg[static_cast<std::size_t>(a)] = M;
  }
  std::vector<Eigen::MatrixXd> C(static_cast<std::size_t>(m));  // C[a](b,d) = C^d_{ab}
  for (int a = 0; a < m; ++a) {
    Eigen::MatrixXd M(m, m);
    for (int b = 0; b < m; ++b)
      for (int d = 0; d < m; ++d) M(b, d) = E_->structure(a, b, d).eval(p.coords);
    C[static_cast<std::size_t>(a)] = M;
  }
  auto bracket_pair = [&](int a, int b, int c) {
    double acc = 0.0;
    for (int d = 0; d < m; ++d) acc += C[static_cast<std::size_t>(a)](b, d) * G(d, c);
    return acc;  // g([e_a, e_b], e_c)
  };

  Christoffels ch;
  ch.m = m;
  ch.data.assign(static_cast<std::size_t>(m * m * m), 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Eigen::VectorXd k(m);
      for (int c = 0; c < m; ++c) {
        double v = dg[static_cast<std::size_t>(a)](b, c) + dg[static_cast<std::size_t>(b)](a, c) - dg[static_cast<std::size_t>(c)](a, b) +
                   bracket_pair(a, b, c) - bracket_pair(a, c, b) - bracket_pair(b, c, a);
        k[c] = 0.5 * v;
      }
      Eigen::VectorXd gamma = solver.solve(k);
      for (int c = 0; c < m; ++c) ch.data[static_cast<std::size_t>((a * m + b) * m + c)] = gamma[c];
    }
  return ch;
}

CheckResult check_torsion_free(const Connection& conn, const SampleGrid& grid) {
  const LieAlgebroid& E = *conn.algebroid();
  int m = E.rank();
  return check_max(
      "connection_torsion_free", grid,
      [&](const Point& p) {
        Christoffels ch = conn.christoffels_at(p);
        double worst = 0.0;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
              double t = ch.gamma(a, b, c) - ch.gamma(b, a, c) - E.structure(a, b, c).eval(p.coords);
              worst = std::max(worst, std::abs(t));
            }
        return worst;
      },
      grid.tol_eq);
}

CheckResult check_metric_compatible(const Connection& conn, const SampleGrid& grid) {
  const LieAlgebroid& E = *conn.algebroid();
  const BundleMetric& g = conn.metric();
  int m = E.rank();
  return check_max(
      "connection_metric_compatible", grid,
      [&](const Point& p) {
        Christoffels ch = conn.christoffels_at(p);
        Eigen::MatrixXd G = g.eval(p);
        double worst = 0.0;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c) {
              double v = E.rho_frame_apply(a, g(b, c)).eval(p.coords);
              for (int d = 0; d < m; ++d)
                v -= ch.gamma(a, b, d) * G(d, c) + ch.gamma(a, c, d) * G(b, d);
              worst = std::max(worst, std::abs(v));
            }
        return worst;
      },
      grid.tol_eq);
}

// --- CovariantField ----------------------------------------------------------

CovariantField::CovariantField(const Connection& conn, TensorField T)
    : conn_(&conn), T_(std::move(T)) {
  const LieAlgebroid& E = *conn.algebroid();
  int m = E.rank();
  // rho_a applied to every stored component, prepared once
  int count = 0;
  switch (T_.kind()) {
    case TensorField::Kind::Form: count = T_.form_term_count(); break;
    case TensorField::Kind::Section: count = m; break;
    case TensorField::Kind::Endomorphism:
    case TensorField::Kind::Covariant2: count = m * m; break;
    default: throw std::invalid_argument("CovariantField: unsupported variance");
  }
  danch_.assign(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(count)));
  for (int a = 0; a < m; ++a)
    for (int k = 0; k < count; ++k) {
      const Expr* comp = nullptr;
      switch (T_.kind()) {
        case TensorField::Kind::Form: comp = &T_.form_canonical(k); break;
        case TensorField::Kind::Section: comp = &T_.section_component(k); break;
        case TensorField::Kind::Endomorphism: comp = &T_.endo_component(k / m, k % m); break;
        case TensorField::Kind::Covariant2: comp = &T_.cov2_component(k / m, k % m); break;
        default: break;
      }
      danch_[static_cast<std::size_t>(a)][static_cast<std::size_t>(k)] = E.rho_frame_apply(a, *comp);
    }
}

double CovariantField::function_at(const Christoffels&, const Point& p, int a) const {
  return danch_[static_cast<std::size_t>(a)][0].eval(p.coords);
}

Eigen::VectorXd CovariantField::section_at(const Christoffels& ch, const Point& p, int a) const {
  int m = ch.m;
  Eigen::VectorXd t = T_.eval_vector(p);
  Eigen::VectorXd out(m);
  for (int c = 0; c < m; ++c) {
    double v = danch_[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)].eval(p.coords);
    for (int b = 0; b < m; ++b) v += ch.gamma(a, b, c) * t[b];
    out[c] = v;
  }
  return out;
}

Eigen::VectorXd CovariantField::one_form_at(const Christoffels& ch, const Point& p, int a) const {
  int m = ch.m;
  Eigen::VectorXd t = T_.eval_vector(p);
  Eigen::VectorXd out(m);
  for (int b = 0; b < m; ++b) {
    double v = danch_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].eval(p.coords);
    for (int c = 0; c < m; ++c) v -= ch.gamma(a, b, c) * t[c];
    out[b] = v;
  }
  return out;
}

std::vector<double> CovariantField::form_at(const Christoffels& ch, const Point& p, int a) const {
  int m = ch.m;
  int deg = T_.degree();
  std::vector<double> t = T_.eval_form(p);
  auto combos = combinations(m, deg);
  std::vector<double> out(combos.size());
  for (std::size_t k = 0; k < combos.size(); ++k) {
    double v = danch_[static_cast<std::size_t>(a)][k].eval(p.coords);
    for (std::size_t slot = 0; slot < combos[k].size(); ++slot) {
      for (int d = 0; d < m; ++d) {
        std::vector<int> idx = combos[k];
        idx[slot] = d;
        int sign = sort_with_sign(idx);
        if (sign == 0) continue;
        v -= ch.gamma(a, combos[k][slot], d) * double(sign) * t[static_cast<std::size_t>(combo_rank(idx, m))];
      }
    }
    out[k] = v;
  }
  return out;
}

Eigen::MatrixXd CovariantField::endo_at(const Christoffels& ch, const Point& p, int a) const {
  int m = ch.m;
  Eigen::MatrixXd F = T_.eval_matrix(p);
  Eigen::MatrixXd out(m, m);
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b) {
      double v = danch_[static_cast<std::size_t>(a)][static_cast<std::size_t>(c * m + b)].eval(p.coords);
      for (int d = 0; d < m; ++d)
        v += ch.gamma(a, d, c) * F(d, b) - ch.gamma(a, b, d) * F(c, d);
      out(c, b) = v;
    }
  return out;
}

Eigen::MatrixXd CovariantField::cov2_at(const Christoffels& ch, const Point& p, int a) const {
  int m = ch.m;
  Eigen::MatrixXd T = T_.eval_matrix(p);
  Eigen::MatrixXd out(m, m);
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < m; ++c) {
      double v = danch_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b * m + c)].eval(p.coords);
      for (int d = 0; d < m; ++d)
        v -= ch.gamma(a, b, d) * T(d, c) + ch.gamma(a, c, d) * T(b, d);
      out(b, c) = v;
    }
  return out;
}

double CovariantField::function_along(const Christoffels& ch, const Point& p,
                                      const Eigen::VectorXd& u) const {
  double out = 0.0;
  for (int a = 0; a < ch.m; ++a)
    if (u[a] != 0.0) out += u[a] * function_at(ch, p, a);
  return out;
}

Eigen::VectorXd CovariantField::section_along(const Christoffels& ch, const Point& p,
                                              const Eigen::VectorXd& u) const {
  int m = ch.m;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < m; ++a)
    if (u[a] != 0.0) out += u[a] * section_at(ch, p, a);
  return out;
}

Eigen::VectorXd CovariantField::one_form_along(const Christoffels& ch, const Point& p,
                                               const Eigen::VectorXd& u) const {
  int m = ch.m;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
  for (int a = 0; a < m; ++a)
    if (u[a] != 0.0) out += u[a] * one_form_at(ch, p, a);
  return out;
}

Eigen::MatrixXd CovariantField::cov2_along(const Christoffels& ch, const Point& p,
                                           const Eigen::VectorXd& u) const {
  int m = ch.m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a)
    if (u[a] != 0.0) out += u[a] * cov2_at(ch, p, a);
  return out;
}

Eigen::MatrixXd CovariantField::endo_along(const Christoffels& ch, const Point& p,
                                           const Eigen::VectorXd& u) const {
  int m = ch.m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a)
    if (u[a] != 0.0) out += u[a] * endo_at(ch, p, a);
  return out;
}

Eigen::VectorXd covariant_derivative_at(const Connection& conn, const TensorField& T,
                                        const TensorField& s, const Point& p) {
  CovariantField cov(conn, T);
  Christoffels ch = conn.christoffels_at(p);
  Eigen::VectorXd u = s.eval_vector(p);
  if (T.kind() == TensorField::Kind::Section) return cov.section_along(ch, p, u);
  if (T.kind() == TensorField::Kind::Form && T.degree() == 1)
    return cov.one_form_along(ch, p, u);
  throw std::invalid_argument("covariant_derivative_at: expects a section or a 1-form");
}

Eigen::MatrixXd covariant_derivative_matrix_at(const Connection& conn, const TensorField& T,
                                               const TensorField& s, const Point& p) {
  CovariantField cov(conn, T);
  Christoffels ch = conn.christoffels_at(p);
  Eigen::VectorXd u = s.eval_vector(p);
  if (T.kind() == TensorField::Kind::Endomorphism) return cov.endo_along(ch, p, u);
  if (T.kind() == TensorField::Kind::Covariant2) return cov.cov2_along(ch, p, u);
  throw std::invalid_argument(
      "covariant_derivative_matrix_at: expects a (1,1)- or (0,2)-tensor");
}

// --- frames ------------------------------------------------------------------

std::vector<Eigen::VectorXd> orthonormal_frame(const Eigen::MatrixXd& G,
                                               std::span<const int> order) {
  int m = int(G.rows());
  std::vector<int> ord(order.begin(), order.end());
  if (ord.empty()) {
    ord.resize(static_cast<std::size_t>(m));
    std::iota(ord.begin(), ord.end(), 0);
  }
  std::vector<Eigen::VectorXd> frame;
  for (int j : ord) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(m, j);
    for (const auto& u : frame) v -= (u.transpose() * G * v)(0) * u;
    double n2 = (v.transpose() * G * v)(0);
    if (n2 < 1e-24) throw std::runtime_error("orthonormal_frame: degenerate metric");
    frame.push_back(v / std::sqrt(n2));
  }
  return frame;
}

std::vector<Eigen::VectorXd> fe_basis(const TensorField& F, const TensorField& xi,
                                      const TensorField& eta, const BundleMetric& g,
                                      const Point& p) {
  const int rank = F.rank();
  if (rank % 2 == 0) throw std::invalid_argument("fe_basis: rank must be odd");
  const int m = (rank - 1) / 2;
  Eigen::MatrixXd Fn = F.eval_matrix(p);
  Eigen::MatrixXd G = g.eval(p);
  Eigen::VectorXd xin = xi.eval_vector(p);
  Eigen::VectorXd etan = eta.eval_vector(p);

  // compatibility probe: g(Fs1, Fs2) = g(s1,s2) - eta(s1)eta(s2) at p
  Eigen::MatrixXd lhs = Fn.transpose() * G * Fn;
  Eigen::MatrixXd rhs = G - etan * etan.transpose();
  if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-6)
    throw std::runtime_error("fe_basis: structure and metric are not compatible at the point");

  auto gdot = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return double(u.transpose() * G * v);
  };

  Eigen::VectorXd xin_unit = xin / std::sqrt(gdot(xin, xin));
  std::vector<Eigen::VectorXd> chosen;    // s_1..s_k
  std::vector<Eigen::VectorXd> images;    // F(s_1)..F(s_k)
  for (int k = 0; k < m; ++k) {
    bool found = false;
    for (int seed = 0; seed < rank && !found; ++seed) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(rank, seed);
      v -= gdot(v, xin_unit) * xin_unit;
      for (int i = 0; i < int(chosen.size()); ++i) {
        v -= gdot(v, chosen[static_cast<std::size_t>(i)]) * chosen[static_cast<std::size_t>(i)];
        v -= gdot(v, images[static_cast<std::size_t>(i)]) * images[static_cast<std::size_t>(i)];
      }
      double n2 = gdot(v, v);
      if (n2 < 1e-12) continue;
      v /= std::sqrt(n2);
      chosen.push_back(v);
      images.push_back(Fn * v);
      found = true;
    }
    if (!found) throw std::runtime_error("fe_basis: numerical degeneracy, no usable seed");
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(rank));
  for (const auto& v : chosen) out.push_back(v);
  for (const auto& v : images) out.push_back(v);
  out.push_back(xin_unit);
  return out;
}

// --- volume form and codifferential ------------------------------------------

Expr expr_det(const std::vector<std::vector<Expr>>& M) {
  std::size_t n = M.size();
  if (n == 1) return M[0][0];
  if (n == 2) return M[0][0] * M[1][1] - M[0][1] * M[1][0];
  Expr acc;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Expr>> minor;
    minor.reserve(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<Expr> row;
      row.reserve(n - 1);
      for (std::size_t c = 0; c < n; ++c)
        if (c != j) row.push_back(M[r][c]);
      minor.push_back(std::move(row));
    }
    Expr term = M[0][j] * expr_det(minor);
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

std::vector<std::vector<Expr>> expr_inverse(const std::vector<std::vector<Expr>>& M) {
  std::size_t n = M.size();
  Expr det = expr_det(M);
  std::vector<std::vector<Expr>> inv(n, std::vector<Expr>(n));
  if (n == 1) {
    inv[0][0] = Expr::constant(1.0) / det;
    return inv;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<std::vector<Expr>> minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<Expr> row;
        for (std::size_t c = 0; c < n; ++c)
          if (c != j) row.push_back(M[r][c]);
        minor.push_back(std::move(row));
      }
      Expr cof = expr_det(minor);
      if ((i + j) % 2 == 1) cof = -cof;
      inv[j][i] = cof / det;  // adjugate transpose
    }
  return inv;
}

TensorField volume_form(const BundleMetric& g) {
  int m = g.owner->rank();
  std::vector<Expr> comps(static_cast<std::size_t>(binom(m, m)));
  comps[0] = sqrt(expr_det(g.comps));
  return TensorField::form(g.owner, m, std::move(comps));
}

std::vector<double> codifferential_at(const Connection& conn, const CovariantField& omega,
                                      const Point& p, std::span<const int> seed_order) {
  const TensorField& w = omega.field();
  int m = conn.algebroid()->rank();
  int deg = w.degree();
  if (deg == 0) return {};
  Christoffels ch = conn.christoffels_at(p);
  Eigen::MatrixXd G = conn.metric().eval(p);
  auto frame = orthonormal_frame(G, seed_order);

  auto combos_out = combinations(m, deg - 1);
  std::vector<double> out(combos_out.size(), 0.0);
  // nabla_{e_b} omega for all b, as canonical numeric component vectors
  std::vector<std::vector<double>> grad(static_cast<std::size_t>(m));
  for (int b = 0; b < m; ++b) grad[static_cast<std::size_t>(b)] = omega.form_at(ch, p, b);

  auto component = [&](const std::vector<double>& vals, std::vector<int> idx) {
    int sign = sort_with_sign(idx);
    if (sign == 0) return 0.0;
    return double(sign) * vals[static_cast<std::size_t>(combo_rank(idx, m))];
  };

  for (const auto& u : frame) {
    // nabla_u omega = u^b nabla_{e_b} omega
    std::vector<double> du(combinations(m, deg).size(), 0.0);
    for (int b = 0; b < m; ++b)
      if (u[b] != 0.0)
        for (std::size_t k = 0; k < du.size(); ++k) du[k] += u[b] * grad[static_cast<std::size_t>(b)][k];
    // -iota_u (nabla_u omega)
    for (std::size_t k = 0; k < combos_out.size(); ++k) {
      double acc = 0.0;
      for (int c = 0; c < m; ++c) {
        if (u[c] == 0.0) continue;
        std::vector<int> idx;
        idx.reserve(static_cast<std::size_t>(deg));
        idx.push_back(c);
        idx.insert(idx.end(), combos_out[k].begin(), combos_out[k].end());
        acc += u[c] * component(du, std::move(idx));
      }
      out[k] -= acc;
    }
  }
  return out;
}

}  // namespace lalg
