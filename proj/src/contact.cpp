#include "lalg/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lalg/combo.hpp"

namespace lalg {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// permutation sign by inversion count
int perm_sign(const std::vector<int>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) ++inv;
  return inv % 2 == 0 ? 1 : -1;
}

TensorField wedge_power(const TensorField& w, int k) {
  TensorField acc = w;
  for (int i = 1; i < k; ++i) acc = wedge(acc, w);
  return acc;
}

// vector-valued 2-form  scale * omega (x) s
TensorField vv2_from_form_section(const TensorField& omega2, const TensorField& s, double scale) {
  const AlgebroidPtr& E = omega2.owner();
  int m = E->rank();
  std::vector<std::vector<Expr>> comps;
  comps.reserve(static_cast<std::size_t>(binom(m, 2)));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      std::vector<Expr> val(static_cast<std::size_t>(m));
      Expr w = Expr::constant(scale) * omega2.form_component({a, b});
      for (int c = 0; c < m; ++c) val[static_cast<std::size_t>(c)] = w * s.section_component(c);
      comps.push_back(std::move(val));
    }
  return TensorField::vector_valued_2form(E, std::move(comps));
}

}  // namespace

double form_value(std::span<const double> canonical, int m, int degree,
                  const std::vector<Eigen::VectorXd>& args) {
  if (degree == 0) return canonical[0];
  auto combos = combinations(m, degree);
  double acc = 0.0;
  Eigen::MatrixXd minor(degree, degree);
  for (std::size_t k = 0; k < combos.size(); ++k) {
    if (canonical[k] == 0.0) continue;
    for (int r = 0; r < degree; ++r)
      for (int c = 0; c < degree; ++c) minor(r, c) = args[static_cast<std::size_t>(c)][combos[k][static_cast<std::size_t>(r)]];
    acc += canonical[k] * minor.determinant();
  }
  return acc;
}

// --- check_almost_contact ----------------------------------------------------

Report check_almost_contact(const AlmostContactStructure& acs, const SampleGrid& grid) {
  const AlgebroidPtr& E = acs.owner;
  int rank = E->rank();
  require(rank % 2 == 1, "check_almost_contact: rank must be odd");
  int m = acs.m();
  Report rep;

  TensorField F2 = compose_endo(acs.F, acs.F);
  TensorField II1 = F2 + TensorField::identity_endomorphism(E) - outer(acs.eta, acs.xi);
  rep.entries.push_back(check_max(
      "F_squared_identity", grid,
      [&](const Point& p) { return II1.eval_matrix(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));

  Expr eta_xi = pair_form_section(acs.eta, acs.xi) - Expr::constant(1.0);
  rep.entries.push_back(check_max(
      "eta_xi_pairing_one", grid, [&](const Point& p) { return std::abs(eta_xi.eval(p.coords)); },
      grid.tol_eq));

  TensorField Fxi = apply_endo(acs.F, acs.xi);
  rep.entries.push_back(check_max(
      "F_xi_zero", grid,
      [&](const Point& p) { return Fxi.eval_vector(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));

  TensorField F3pF = compose_endo(F2, acs.F) + acs.F;
  rep.entries.push_back(check_max(
      "F_cubed_plus_F", grid,
      [&](const Point& p) { return F3pF.eval_matrix(p).cwiseAbs().maxCoeff(); }, grid.tol_eq));

  rep.entries.push_back(check_max(
      "eta_circ_F", grid,
      [&](const Point& p) {
        Eigen::VectorXd eta = acs.eta.eval_vector(p);
        Eigen::MatrixXd Fm = acs.F.eval_matrix(p);
        return (eta.transpose() * Fm).cwiseAbs().maxCoeff();
      },
      grid.tol_eq));

  // numeric rank F = 2m: exactly one singular value below tolerance
  const double rank_tol = 1e-7;
  rep.entries.push_back(check_max(
      "rank_F_small_sv", grid,
      [&](const Point& p) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(acs.F.eval_matrix(p));
        return svd.singularValues().minCoeff();
      },
      rank_tol));
  if (m >= 1) {
    rep.entries.push_back(check_nonzero(
        "rank_F_large_sv", grid,
        [&](const Point& p) {
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(acs.F.eval_matrix(p));
          return svd.singularValues()[2 * m - 1];  // 2m-th largest
        },
        rank_tol));
  }
  return rep;
}

Report check_compatibility(const AlmostContactStructure& acs, const SampleGrid& grid) {
  require(acs.metric.has_value(), "check_compatibility: structure carries no metric");
  const BundleMetric& g = *acs.metric;
  Report rep;

  rep.entries.push_back(check_max(
      "metric_compatibility", grid,
      [&](const Point& p) {
        Eigen::MatrixXd G = g.eval(p);
        Eigen::MatrixXd F = acs.F.eval_matrix(p);
        Eigen::VectorXd eta = acs.eta.eval_vector(p);
        Eigen::MatrixXd r = F.transpose() * G * F - G + eta * eta.transpose();
        return r.cwiseAbs().maxCoeff();
      },
      grid.tol_eq));

  rep.entries.push_back(check_max(
      "eta_is_metric_dual_of_xi", grid,
      [&](const Point& p) {
        Eigen::VectorXd eta = acs.eta.eval_vector(p);
        Eigen::VectorXd gxi = g.eval(p) * acs.xi.eval_vector(p);
        return (eta - gxi).cwiseAbs().maxCoeff();
      },
      grid.tol_eq));

  rep.entries.push_back(check_max(
      "F_plus_eta_xi_orthogonal", grid,
      [&](const Point& p) {
        Eigen::MatrixXd G = g.eval(p);
        Eigen::MatrixXd F = acs.F.eval_matrix(p);
        Eigen::VectorXd eta = acs.eta.eval_vector(p);
        Eigen::VectorXd xi = acs.xi.eval_vector(p);
        Eigen::MatrixXd P = F + xi * eta.transpose();
        Eigen::MatrixXd M = -F + xi * eta.transpose();
        double r1 = (P.transpose() * G * P - G).cwiseAbs().maxCoeff();
        double r2 = (M.transpose() * G * M - G).cwiseAbs().maxCoeff();
        return std::max(r1, r2);
      },
      grid.tol_eq));

  rep.entries.push_back(check_max(
      "F_skew_adjoint", grid,
      [&](const Point& p) {
        Eigen::MatrixXd G = g.eval(p);
        Eigen::MatrixXd F = acs.F.eval_matrix(p);
        return (F.transpose() * G + G * F).cwiseAbs().maxCoeff();
      },
      grid.tol_eq));

  rep.entries.push_back(check_positive_definite(g, grid));
  return rep;
}

// --- metric synthesis ---------------------------------------------------------

BundleMetric build_compatible_metric(const AlmostContactStructure& acs, const BundleMetric& seed) {
  const AlgebroidPtr& E = acs.owner;
  int m = E->rank();
  // positive-definiteness probe of the seed at deterministic box points
  if (!E->chart().box.empty()) {
    for (const auto& p : halton_points(E->chart().box, 5, 777)) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(seed.eval(p));
      if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("build_compatible_metric: seed metric not positive definite");
    }
  }
  TensorField F2 = compose_endo(acs.F, acs.F);
  // g*(s,t) = seed(F^2 s, F^2 t) + eta(s) eta(t)
  std::vector<std::vector<Expr>> gstar(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Expr acc;
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          const Expr& s = seed(c, d);
          if (!s.is_zero()) acc = acc + s * F2.endo_component(c, a) * F2.endo_component(d, b);
        }
      gstar[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          acc + acs.eta.form_canonical(a) * acs.eta.form_canonical(b);
    }
  // g(s,t) = (g*(Fs,Ft) + g*(s,t) + eta(s)eta(t)) / 2
  std::vector<std::vector<Expr>> g(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Expr acc;
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          const Expr& s = gstar[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
          if (!s.is_zero())
            acc = acc + s * acs.F.endo_component(c, a) * acs.F.endo_component(d, b);
        }
      acc = acc + gstar[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +
            acs.eta.form_canonical(a) * acs.eta.form_canonical(b);
      g[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = Expr::constant(0.5) * acc;
    }
  return BundleMetric{E, std::move(g)};
}

TensorField fundamental_form(const AlmostContactStructure& acs) {
  require(acs.metric.has_value(), "fundamental_form: missing metric");
  const BundleMetric& g = *acs.metric;
  int m = acs.owner->rank();
  std::vector<std::vector<Expr>> vals(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      Expr acc;
      for (int c = 0; c < m; ++c) {
        const Expr& gc = g(a, c);
        if (!gc.is_zero()) acc = acc + gc * acs.F.endo_component(c, b);
      }
      vals[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = acc;
    }
  return TensorField::form2(acs.owner, vals);
}

// --- contact test --------------------------------------------------------------

namespace {

// Permutation-expansion scalar from the frame components; Omega_ab here is
// half the plain coordinate derivative of eta (the C-term enters with the sign
// dictated by [e_a,e_b] = C^c_{ab} e_c).
double lambda_permutation(const Eigen::VectorXd& eta, const Eigen::MatrixXd& omega_half) {
  int n = int(eta.size());  // 2m+1
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double acc = 0.0;
  do {
    double term = eta[perm[0]];
    if (term != 0.0)
      for (int k = 1; k + 1 < n; k += 2) {
        term *= omega_half(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(k + 1)]);
        if (term == 0.0) break;
      }
    if (term != 0.0) acc += perm_sign(perm) * term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return double(n) * acc;
}

}  // namespace

Report contact_test(const AlgebroidPtr& E, const TensorField& eta, const SampleGrid& grid,
                    DConvention convention) {
  int rank = E->rank();
  require(rank % 2 == 1, "contact_test: rank must be odd");
  int m = (rank - 1) / 2;
  Report rep;
  if (m == 0) {
    CheckResult c;
    c.name = "contact_condition";
    c.pass = false;
    c.note = "rank 1 (m = 0): contact flags are defined false";
    rep.entries.push_back(c);
    return rep;
  }

  TensorField deta = exterior_derivative(eta, convention);
  TensorField top = wedge(eta, wedge_power(deta, m));
  const Expr& coeff = top.form_canonical(0);

  // Independent route: the frame components Omega_ab assembled directly from
  // the coordinate formula (anchor derivatives of the eta components plus the
  // structure-function term with the sign dictated by [e_a,e_b] = C^c_{ab} e_c).
  std::vector<std::vector<Expr>> omega_half(static_cast<std::size_t>(rank),
                                            std::vector<Expr>(static_cast<std::size_t>(rank)));
  for (int a = 0; a < rank; ++a)
    for (int b = 0; b < rank; ++b) {
      Expr acc = E->rho_frame_apply(a, eta.form_canonical(b)) -
                 E->rho_frame_apply(b, eta.form_canonical(a));
      for (int c = 0; c < rank; ++c) {
        const Expr& C = E->structure(a, b, c);
        if (!C.is_zero()) acc = acc - C * eta.form_canonical(c);
      }
      omega_half[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          Expr::constant(0.5) * acc;
    }
  auto omega_at = [&, rank](const Point& p) {
    Eigen::MatrixXd W(rank, rank);
    for (int a = 0; a < rank; ++a)
      for (int b = 0; b < rank; ++b)
        W(a, b) = omega_half[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].eval(p.coords);
    return W;
  };

  rep.entries.push_back(check_nonzero(
      "eta_wedge_deta_m_nonzero", grid,
      [&](const Point& p) { return std::abs(coeff.eval(p.coords)); }, grid.tol_nonzero));

  rep.entries.push_back(check_nonzero(
      "lambda_permutation_nonzero", grid,
      [&](const Point& p) {
        return std::abs(lambda_permutation(eta.eval_vector(p), omega_at(p)));
      },
      grid.tol_nonzero));

  // The two routes differ by the fixed frame-normalization constant
  // (2m+1) (times 2^m under the half convention).
  double scale = double(rank) * (convention == DConvention::Half ? std::pow(2.0, m) : 1.0);
  rep.entries.push_back(check_max(
      "wedge_vs_permutation_route", grid,
      [&](const Point& p) {
        double lam = lambda_permutation(eta.eval_vector(p), omega_at(p));
        double cw = coeff.eval(p.coords);
        return std::abs(lam - scale * cw) / std::max(1.0, std::abs(lam));
      },
      grid.tol_eq));
  return rep;
}

// --- Reeb solver ----------------------------------------------------------------

ReebResult reeb_section(const AlgebroidPtr& E, const TensorField& eta, const SampleGrid& grid) {
  int rank = E->rank();
  require(rank % 2 == 1, "reeb_section: rank must be odd");
  int m = (rank - 1) / 2;
  require(m >= 1, "reeb_section: rank 1 has no contact structure");
  TensorField deta = exterior_derivative(eta);  // plain; scaling does not move the kernel

  auto solve_at = [&](const Point& p) {
    Eigen::VectorXd ev = eta.eval_vector(p);
    Eigen::MatrixXd W = deta.eval_form2_matrix(p);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const auto& sv = svd.singularValues();
    int small = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] < 1e-10 * std::max(1.0, sv[0])) ++small;
    if (small != 1) {
      std::ostringstream os;
      os << "reeb_section: singular system (contact condition violated) at point (";
      for (std::size_t i = 0; i < p.coords.size(); ++i) os << (i ? ", " : "") << p.coords[i];
      os << ")";
      throw std::runtime_error(os.str());
    }
    Eigen::MatrixXd A(rank + 1, rank);
    A.row(0) = ev.transpose();
    A.bottomRows(rank) = W;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rank + 1);
    b[0] = 1.0;
    return Eigen::VectorXd(A.colPivHouseholderQr().solve(b));
  };

  ReebResult out;
  out.values.reserve(grid.size());
  for (const auto& p : grid.points) out.values.push_back(solve_at(p));

  Report rep;
  {
    CheckResult c;
    c.name = "reeb_defining_conditions";
    c.mode = CheckResult::Mode::MaxBelow;
    c.threshold = grid.tol_eq;
    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Point& p = grid.points[i];
      Eigen::VectorXd ev = eta.eval_vector(p);
      Eigen::MatrixXd W = deta.eval_form2_matrix(p);
      double r = std::abs(ev.dot(out.values[i]) - 1.0);
      r = std::max(r, (W * out.values[i]).cwiseAbs().maxCoeff());
      if (r > worst) {
        worst = r;
        worst_i = i;
      }
    }
    c.value = worst;
    c.pass = worst < c.threshold;
    c.worst = grid.points[worst_i];
    rep.entries.push_back(c);
  }
  {
    // Loose smoothness probe: the solved section at the midpoint of two grid
    // points should be close to the average of the endpoint solutions.
    CheckResult c;
    c.name = "reeb_interpolation_probe";
    c.mode = CheckResult::Mode::MaxBelow;
    c.threshold = 0.5;
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size() && i < 16; ++i) {
      std::vector<double> mid(grid.points[i].coords.size());
      for (std::size_t k = 0; k < mid.size(); ++k)
        mid[k] = 0.5 * (grid.points[i].coords[k] + grid.points[i + 1].coords[k]);
      Eigen::VectorXd xm = solve_at(Point(mid));
      Eigen::VectorXd avg = 0.5 * (out.values[i] + out.values[i + 1]);
      double scale = std::max(1.0, avg.cwiseAbs().maxCoeff());
      worst = std::max(worst, (xm - avg).cwiseAbs().maxCoeff() / scale);
    }
    c.value = worst;
    c.pass = worst < c.threshold;
    c.note = "loose midpoint-vs-average probe";
    rep.entries.push_back(c);
  }
  out.report = std::move(rep);
  return out;
}

// --- induced structure (eta, Omega, h) -------------------------------------------

Eigen::VectorXd kernel_direction_oracle(const Eigen::MatrixXd& omega, const Eigen::MatrixXd& h) {
  int n = int(omega.rows());  // 2m+1
  int two_m = n - 1;
  double norm = 1.0;
  for (int k = 2; k <= two_m; ++k) norm *= k;  // (2m)!
  norm *= std::sqrt(h.determinant());
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < n; ++a) {
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
      if (i != a) rest.push_back(i);
    std::sort(rest.begin(), rest.end());
    double acc = 0.0;
    do {
      std::vector<int> full;
      full.reserve(static_cast<std::size_t>(n));
      full.push_back(a);
      full.insert(full.end(), rest.begin(), rest.end());
      double term = perm_sign(full);
      for (int k = 0; k + 1 < two_m; k += 2) {
        term *= omega(rest[static_cast<std::size_t>(k)], rest[static_cast<std::size_t>(k + 1)]);
        if (term == 0.0) break;
      }
      acc += term;
    } while (std::next_permutation(rest.begin(), rest.end()));
    s[a] = acc / norm;
  }
  return s;
}

InducedStructure induce_from_pair(const AlgebroidPtr& E, const TensorField& eta,
                                  const TensorField& Omega, const BundleMetric& h,
                                  const SampleGrid& grid) {
  int rank = E->rank();
  require(rank % 2 == 1, "induce_from_pair: rank must be odd");
  int m = (rank - 1) / 2;
  require(m >= 1, "induce_from_pair: rank must be at least 3");

  TensorField top = wedge(eta, wedge_power(Omega, m));
  const Expr& top_coeff = top.form_canonical(0);

  InducedStructure out;
  out.values.reserve(grid.size());
  double worst_ii1 = 0.0, worst_pair = 0.0, worst_cos = 1.0;
  std::size_t worst_ii1_i = 0, worst_cos_i = 0;

  for (std::size_t pi = 0; pi < grid.size(); ++pi) {
    const Point& p = grid.points[pi];
    Eigen::MatrixXd W = Omega.eval_form2_matrix(p);
    Eigen::MatrixXd H = h.eval(p);
    Eigen::VectorXd etav = eta.eval_vector(p);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int small = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] < 1e-9 * std::max(1.0, sv[0])) ++small;
    if (small != 1)
      throw std::runtime_error("induce_from_pair: nullspace dimension != 1 at a grid point");
    Eigen::VectorXd kernel = svd.matrixV().col(rank - 1);
    if (etav.dot(kernel) < 0.0) kernel = -kernel;

    Eigen::VectorXd xi = kernel / std::sqrt(double(kernel.transpose() * H * kernel));
    Eigen::VectorXd eta_star = H * xi;

    // h-orthonormal basis of the complement of xi
    std::vector<Eigen::VectorXd> basis;
    for (int seed = 0; seed < rank && int(basis.size()) < 2 * m; ++seed) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(rank, seed);
      v -= double(xi.transpose() * H * v) * xi;
      for (const auto& b : basis) v -= double(b.transpose() * H * v) * b;
      double n2 = v.transpose() * H * v;
      if (n2 < 1e-12) continue;
      basis.push_back(v / std::sqrt(n2));
    }
    if (int(basis.size()) != 2 * m)
      throw std::runtime_error("induce_from_pair: could not complete a complement basis");

    Eigen::MatrixXd B(rank, 2 * m);
    for (int i = 0; i < 2 * m; ++i) B.col(i) = basis[static_cast<std::size_t>(i)];
    Eigen::MatrixXd A = B.transpose() * W * B;  // skew on the complement
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
    if (es.eigenvalues().minCoeff() < 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff()))
      throw std::runtime_error("induce_from_pair: polar decomposition degenerate");
    Eigen::MatrixXd K_inv_sqrt = es.operatorInverseSqrt();
    Eigen::MatrixXd F_perp = A * K_inv_sqrt;
    Eigen::MatrixXd F = B * F_perp * B.transpose() * H;

    double r = (F * F + Eigen::MatrixXd::Identity(rank, rank) - xi * eta_star.transpose())
                   .cwiseAbs()
                   .maxCoeff();
    r = std::max(r, (F * xi).cwiseAbs().maxCoeff());
    r = std::max(r, (eta_star.transpose() * F).cwiseAbs().maxCoeff());
    if (r > worst_ii1) {
      worst_ii1 = r;
      worst_ii1_i = pi;
    }
    worst_pair = std::max(worst_pair, std::abs(eta_star.dot(xi) - 1.0));

    if (m <= 2) {
      Eigen::VectorXd oracle = kernel_direction_oracle(W, H);
      double c = std::abs(oracle.dot(kernel)) / (oracle.norm() * kernel.norm());
      if (c < worst_cos) {
        worst_cos = c;
        worst_cos_i = pi;
      }
    }
    out.values.push_back(PointStructure{std::move(F), std::move(xi), std::move(eta_star)});
  }

  Report rep;
  rep.entries.push_back(check_nonzero(
      "eta_wedge_Omega_m_nonzero", grid,
      [&](const Point& p) { return std::abs(top_coeff.eval(p.coords)); }, grid.tol_nonzero));
  {
    CheckResult c;
    c.name = "induced_II1_residual";
    c.value = worst_ii1;
    c.threshold = 1e-8;
    c.mode = CheckResult::Mode::MaxBelow;
    c.pass = worst_ii1 < c.threshold;
    c.worst = grid.points[worst_ii1_i];
    rep.entries.push_back(c);
  }
  {
    CheckResult c;
    c.name = "induced_eta_xi_pairing";
    c.value = worst_pair;
    c.threshold = 1e-10;
    c.mode = CheckResult::Mode::MaxBelow;
    c.pass = worst_pair < c.threshold;
    rep.entries.push_back(c);
  }
  if (m <= 2) {
    CheckResult c;
    c.name = "kernel_vs_permutation_oracle_cosine";
    c.value = worst_cos;
    c.threshold = 1.0 - 1e-9;
    c.mode = CheckResult::Mode::MinAbove;
    c.pass = worst_cos > c.threshold;
    c.worst = grid.points[worst_cos_i];
    rep.entries.push_back(c);
  } else {
    rep.entries.push_back(skipped("kernel_vs_permutation_oracle_cosine", "oracle limited to m <= 2"));
  }
  out.report = std::move(rep);
  return out;
}

// --- normality tensors ------------------------------------------------------------

NormalityTensors normality_tensors(const AlmostContactStructure& acs) {
  const AlgebroidPtr& E = acs.owner;
  int m = E->rank();
  TensorField NF = nijenhuis(acs.F);
  TensorField deta = exterior_derivative(acs.eta, acs.convention);
  TensorField N1 = NF + vv2_from_form_section(deta, acs.xi, 2.0);

  std::vector<TensorField> LFae;
  LFae.reserve(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a)
    LFae.push_back(lie_derivative(apply_endo(acs.F, TensorField::frame_section(E, a)), acs.eta));
  std::vector<std::vector<Expr>> n2(static_cast<std::size_t>(m), std::vector<Expr>(static_cast<std::size_t>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      n2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          LFae[static_cast<std::size_t>(a)].form_canonical(b) - LFae[static_cast<std::size_t>(b)].form_canonical(a);
  TensorField N2 = TensorField::form2(E, n2);

  TensorField N3 = lie_derivative(acs.xi, acs.F).scaled(0.5);
  TensorField N4 = lie_derivative(acs.xi, acs.eta);
  return NormalityTensors{std::move(N1), std::move(N2), std::move(N3), std::move(N4)};
}

// --- classification ------------------------------------------------------------------

Classification classify(const AlmostContactStructure& acs, const SampleGrid& grid, double tol) {
  const AlgebroidPtr& E = acs.owner;
  int rank = E->rank();
  int m = acs.m();
  SampleGrid cgrid = grid;
  cgrid.tol_eq = tol;

  Classification cls;
  cls.convention = acs.convention;
  Report& rep = cls.report;

  Report ac = check_almost_contact(acs, cgrid);
  cls.flags.almost_contact = ac.all_pass();
  rep.entries.insert(rep.entries.end(), ac.entries.begin(), ac.entries.end());

  if (!acs.metric.has_value()) {
    rep.entries.push_back(skipped("compatibility_and_higher_flags", "structure carries no metric"));
    return cls;
  }
  Report comp = check_compatibility(acs, cgrid);
  cls.flags.compatible = comp.all_pass();
  rep.entries.insert(rep.entries.end(), comp.entries.begin(), comp.entries.end());

  if (m == 0) {
    rep.entries.push_back(
        skipped("contact_flags", "rank 1 (m = 0): contact flags are defined false"));
    return cls;
  }

  const BundleMetric& g = *acs.metric;
  TensorField Omega = fundamental_form(acs);
  TensorField deta_conv = exterior_derivative(acs.eta, acs.convention);

  // contact Riemannian: d eta = Omega under the declared convention.
  TensorField cr_res = deta_conv - Omega;
  CheckResult cr = check_max(
      "contact_riemannian_deta_equals_Omega", cgrid,
      [&](const Point& p) {
        double worst = 0.0;
        for (double v : cr_res.eval_form(p)) worst = std::max(worst, std::abs(v));
        return worst;
      },
      tol);
  cr.note = acs.convention == DConvention::Half ? "convention: half" : "convention: plain";
  rep.entries.push_back(cr);
  Report ct = contact_test(E, acs.eta, cgrid, acs.convention);
  bool contact_nonzero = ct.all_pass();
  rep.entries.insert(rep.entries.end(), ct.entries.begin(), ct.entries.end());
  cls.flags.contact_riemannian = cr.pass && contact_nonzero;

  // normal: N1 = 0 (d eta term under the declared convention).
  NormalityTensors N = normality_tensors(acs);
  rep.entries.push_back(check_max(
      "normal_N1_zero", cgrid,
      [&](const Point& p) {
        double worst = 0.0;
        for (int a = 0; a < rank; ++a)
          for (int b = a + 1; b < rank; ++b)
            worst = std::max(worst, N.N1.eval_vv2(a, b, p).cwiseAbs().maxCoeff());
        return worst;
      },
      tol));
  cls.flags.normal = rep.entries.back().pass;

  Connection conn = levi_civita(E, g);
  CovariantField covXi(conn, acs.xi);
  CovariantField covF(conn, acs.F);

  // K-contact: contact Riemannian and nabla xi = -F.
  rep.entries.push_back(check_max(
      "K_contact_nabla_xi_plus_F", cgrid,
      [&](const Point& p) {
        Christoffels ch = conn.christoffels_at(p);
        Eigen::MatrixXd F = acs.F.eval_matrix(p);
        double worst = 0.0;
        for (int a = 0; a < rank; ++a) {
          Eigen::VectorXd v = covXi.section_at(ch, p, a) + F.col(a);
          worst = std::max(worst, v.cwiseAbs().maxCoeff());
        }
        return worst;
      },
      tol));
  cls.flags.K_contact = cls.flags.contact_riemannian && rep.entries.back().pass;

  // Sasakian: (nabla_s F)t = g(s,t) xi - eta(t) s.
  rep.entries.push_back(check_max(
      "sasakian_nabla_F_identity", cgrid,
      [&](const Point& p) {
        Christoffels ch = conn.christoffels_at(p);
        Eigen::MatrixXd G = g.eval(p);
        Eigen::VectorXd xi = acs.xi.eval_vector(p);
        Eigen::VectorXd eta = acs.eta.eval_vector(p);
        double worst = 0.0;
        for (int a = 0; a < rank; ++a) {
          Eigen::MatrixXd dF = covF.endo_at(ch, p, a);
          for (int b = 0; b < rank; ++b) {
            Eigen::VectorXd v = dF.col(b) - G(a, b) * xi + eta[b] * Eigen::VectorXd::Unit(rank, a);
            worst = std::max(worst, v.cwiseAbs().maxCoeff());
          }
        }
        return worst;
      },
      tol));
  cls.flags.sasakian = rep.entries.back().pass;

  // almost Kenmotsu: d eta = 0 and d Omega = 2 eta ^ Omega.
  CheckResult ak1 = check_max(
      "almost_kenmotsu_deta_zero", cgrid,
      [&](const Point& p) {
        double worst = 0.0;
        for (double v : deta_conv.eval_form(p)) worst = std::max(worst, std::abs(v));
        return worst;
      },
      tol);
  rep.entries.push_back(ak1);
  TensorField dOmega = exterior_derivative(Omega);
  TensorField akres = dOmega - wedge(acs.eta, Omega).scaled(2.0);
  CheckResult ak2 = check_max(
      "almost_kenmotsu_dOmega_identity", cgrid,
      [&](const Point& p) {
        double worst = 0.0;
        for (double v : akres.eval_form(p)) worst = std::max(worst, std::abs(v));
        return worst;
      },
      tol);
  rep.entries.push_back(ak2);
  cls.flags.almost_kenmotsu = ak1.pass && ak2.pass;

  // Kenmotsu: (nabla_s F)t = -eta(t) F(s) - g(s, F(t)) xi.
  rep.entries.push_back(check_max(
      "kenmotsu_nabla_F_identity", cgrid,
      [&](const Point& p) {
        Christoffels ch = conn.christoffels_at(p);
        Eigen::MatrixXd G = g.eval(p);
        Eigen::MatrixXd F = acs.F.eval_matrix(p);
        Eigen::VectorXd xi = acs.xi.eval_vector(p);
        Eigen::VectorXd eta = acs.eta.eval_vector(p);
        Eigen::MatrixXd GF = G * F;
        double worst = 0.0;
        for (int a = 0; a < rank; ++a) {
          Eigen::MatrixXd dF = covF.endo_at(ch, p, a);
          for (int b = 0; b < rank; ++b) {
            Eigen::VectorXd v = dF.col(b) + eta[b] * F.col(a) + GF(a, b) * xi;
            worst = std::max(worst, v.cwiseAbs().maxCoeff());
          }
        }
        return worst;
      },
      tol));
  cls.flags.kenmotsu = rep.entries.back().pass;

  auto flag_entry = [&](const std::string& name, bool ok, const std::string& note) {
    CheckResult c;
    c.name = name;
    c.value = ok ? 0.0 : 1.0;
    c.threshold = 0.5;
    c.pass = ok;
    c.note = note;
    rep.entries.push_back(c);
  };
  flag_entry("sasakian_implies_K_contact", !cls.flags.sasakian || cls.flags.K_contact,
             "flag implication");
  flag_entry("rank3_K_contact_implies_sasakian",
             !(rank == 3 && cls.flags.K_contact) || cls.flags.sasakian, "flag implication");
  flag_entry("kenmotsu_excludes_K_contact", !cls.flags.kenmotsu || !cls.flags.K_contact,
             "flag implication");
  flag_entry("kenmotsu_iff_normal_almost_kenmotsu",
             cls.flags.kenmotsu == (cls.flags.normal && cls.flags.almost_kenmotsu),
             "flag equivalence");
  return cls;
}

// --- identity suite -------------------------------------------------------------------

Report check_identities(const AlmostContactStructure& acs, const Connection& conn,
                        const SampleGrid& grid, const Classification& cls, unsigned seed,
                        int triples) {
  require(acs.metric.has_value(), "check_identities: structure carries no metric");
  const AlgebroidPtr& E = acs.owner;
  const BundleMetric& g = *acs.metric;
  int rank = E->rank();
  Report rep;

  TensorField Omega = fundamental_form(acs);
  TensorField dOmega = exterior_derivative(Omega);          // plain
  TensorField deta_plain = exterior_derivative(acs.eta);    // plain
  TensorField NF = nijenhuis(acs.F);
  NormalityTensors N = normality_tensors(acs);
  // half-reading N1 = N_F + d^plain eta (x) xi, used by the covariant
  // characterizations (the half normalization)
  TensorField N1_half = NF + vv2_from_form_section(deta_plain, acs.xi, 1.0);
  TensorField Lxi_g = lie_derivative(acs.xi, g.as_cov2());

  CovariantField covF(conn, acs.F);
  CovariantField covXi(conn, acs.xi);
  CovariantField covEta(conn, acs.eta);

  const double tol = 1e-8;

  // Master formula (covariant derivative of F against the N-tensors and the
  // differentials; all terms in the half normalization).
  {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Eigen::VectorXd> dirs;
    for (int t = 0; t < 3 * triples; ++t) {
      Eigen::VectorXd v(rank);
      for (int i = 0; i < rank; ++i) v[i] = dist(rng);
      dirs.push_back(v);
    }
    rep.entries.push_back(check_max(
        "covariant_master_formula", grid,
        [&](const Point& p) {
          Christoffels ch = conn.christoffels_at(p);
          Eigen::MatrixXd G = g.eval(p);
          Eigen::MatrixXd F = acs.F.eval_matrix(p);
          Eigen::VectorXd xi = acs.xi.eval_vector(p);
          Eigen::VectorXd eta = acs.eta.eval_vector(p);
          Eigen::MatrixXd W = deta_plain.eval_form2_matrix(p);
          Eigen::MatrixXd N2m = N.N2.eval_form2_matrix(p);
          std::vector<double> dOm = dOmega.eval_form(p);
          std::vector<Eigen::MatrixXd> dF(static_cast<std::size_t>(rank));
          for (int a = 0; a < rank; ++a) dF[static_cast<std::size_t>(a)] = covF.endo_at(ch, p, a);
          std::vector<std::vector<Eigen::VectorXd>> NFv(static_cast<std::size_t>(rank));
          for (int a = 0; a < rank; ++a) {
            NFv[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(rank));
            for (int b = 0; b < rank; ++b) NFv[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = NF.eval_vv2(a, b, p);
          }
          auto nf = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(rank);
            for (int a = 0; a < rank; ++a)
              for (int b = 0; b < rank; ++b) {
                double c = v[a] * w[b];
                if (c != 0.0) acc += c * NFv[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
              }
            return acc;
          };
          double worst = 0.0;
          for (int t = 0; t < triples; ++t) {
            const Eigen::VectorXd& u = dirs[static_cast<std::size_t>(3 * t)];
            const Eigen::VectorXd& v = dirs[static_cast<std::size_t>(3 * t + 1)];
            const Eigen::VectorXd& w = dirs[static_cast<std::size_t>(3 * t + 2)];
            Eigen::MatrixXd dFu = Eigen::MatrixXd::Zero(rank, rank);
            for (int a = 0; a < rank; ++a)
              if (u[a] != 0.0) dFu += u[a] * dF[static_cast<std::size_t>(a)];
            double lhs = 2.0 * double(w.transpose() * G * (dFu * v));
            Eigen::VectorXd Fv = F * v, Fw = F * w, Fu = F * u;
            double rhs = form_value(dOm, rank, 3, {u, Fv, Fw}) - form_value(dOm, rank, 3, {u, v, w});
            Eigen::VectorXd n1 = nf(v, w) + double(v.transpose() * W * w) * xi;
            rhs += double(n1.transpose() * G * Fu);
            rhs += double(v.transpose() * N2m * w) * eta.dot(u);
            rhs += double(Fv.transpose() * W * u) * eta.dot(w);
            rhs -= double(Fw.transpose() * W * u) * eta.dot(v);
            worst = std::max(worst, std::abs(lhs - rhs));
          }
          return worst;
        },
        tol));
  }

  auto residual_vv2 = [&](const TensorField& T, const Point& p) {
    double worst = 0.0;
    for (int a = 0; a < rank; ++a)
      for (int b = a + 1; b < rank; ++b)
        worst = std::max(worst, T.eval_vv2(a, b, p).cwiseAbs().maxCoeff());
    return worst;
  };

  // N-tensor identities of contact Riemannian structures, gated on the flag.
  if (cls.flags.contact_riemannian) {
    rep.entries.push_back(check_max(
        "contact_N2_zero", grid,
        [&](const Point& p) { return N.N2.eval_form2_matrix(p).cwiseAbs().maxCoeff(); }, tol));
    rep.entries.push_back(check_max(
        "contact_N4_zero", grid,
        [&](const Point& p) { return N.N4.eval_vector(p).cwiseAbs().maxCoeff(); }, tol));
    {
      ScanResult n3 = scan_grid(grid, [&](const Point& p) {
        return N.N3.eval_matrix(p).cwiseAbs().maxCoeff();
      });
      ScanResult lg = scan_grid(grid, [&](const Point& p) {
        return Lxi_g.eval_matrix(p).cwiseAbs().maxCoeff();
      });
      CheckResult c;
      c.name = "N3_zero_iff_xi_killing";
      bool agree = (n3.max_abs < tol) == (lg.max_abs < tol);
      c.value = agree ? 0.0 : 1.0;
      c.threshold = 0.5;
      c.pass = agree;
      c.note = "max|N3| = " + fmt(n3.max_abs) + ", max|L_xi g| = " + fmt(lg.max_abs);
      rep.entries.push_back(c);
    }
    rep.entries.push_back(check_max(
        "nabla_xi_F_zero", grid,
        [&](const Point& p) {
          Christoffels ch = conn.christoffels_at(p);
          Eigen::VectorXd xi = acs.xi.eval_vector(p);
          return covF.endo_along(ch, p, xi).cwiseAbs().maxCoeff();
        },
        tol));
    // L_xi eta = 0 and L_xi (d eta) = 0 (the eta part is the N4 entry above)
    TensorField Lxi_deta = lie_derivative(acs.xi, deta_plain);
    rep.entries.push_back(check_max(
        "Lxi_deta_zero", grid,
        [&](const Point& p) {
          double worst = 0.0;
          for (double v : Lxi_deta.eval_form(p)) worst = std::max(worst, std::abs(v));
          return worst;
        },
        tol));
  } else {
    rep.entries.push_back(skipped("contact_N_tensor_identities", "not contact Riemannian"));
  }

  // Covariant N3 identities, gated on the half-normalized contact condition d eta / 2 = Omega.
  {
    TensorField gate_res = deta_plain.scaled(0.5) - Omega;
    double gate = scan_grid(grid, [&](const Point& p) {
                    double worst = 0.0;
                    for (double v : gate_res.eval_form(p)) worst = std::max(worst, std::abs(v));
                    return worst;
                  }).max_abs;
    if (gate < tol) {
      rep.entries.push_back(check_max(
          "contact_nabla_identities", grid,
          [&](const Point& p) {
            Christoffels ch = conn.christoffels_at(p);
            Eigen::MatrixXd G = g.eval(p);
            Eigen::MatrixXd F = acs.F.eval_matrix(p);
            Eigen::VectorXd xi = acs.xi.eval_vector(p);
            Eigen::VectorXd eta = acs.eta.eval_vector(p);
            Eigen::MatrixXd N3m = N.N3.eval_matrix(p);
            double worst = 0.0;
            // (i) g-symmetry of N3
            worst = std::max(worst, (G * N3m - (G * N3m).transpose()).cwiseAbs().maxCoeff());
            // (ii) nabla_s xi = -F(s) - F(N3(s))
            for (int a = 0; a < rank; ++a) {
              Eigen::VectorXd v = covXi.section_at(ch, p, a) + F.col(a) + F * N3m.col(a);
              worst = std::max(worst, v.cwiseAbs().maxCoeff());
            }
            // (iii) F N3 + N3 F = 0
            worst = std::max(worst, (F * N3m + N3m * F).cwiseAbs().maxCoeff());
            // (iv) traces and eta(N3) and N3(xi)
            worst = std::max(worst, std::abs(N3m.trace()));
            worst = std::max(worst, std::abs((N3m * F).trace()));
            worst = std::max(worst, (N3m * xi).cwiseAbs().maxCoeff());
            worst = std::max(worst, (eta.transpose() * N3m).cwiseAbs().maxCoeff());
            // (v) (nabla_s1 F)s2 + (nabla_{Fs1} F)(F s2) =
            //     2g(s1,s2) xi - eta(s2)(s1 + N3 s1 + eta(s1) xi)
            std::vector<Eigen::MatrixXd> dF(static_cast<std::size_t>(rank));
            for (int a = 0; a < rank; ++a) dF[static_cast<std::size_t>(a)] = covF.endo_at(ch, p, a);
            for (int a = 0; a < rank; ++a) {
              Eigen::MatrixXd dFFa = Eigen::MatrixXd::Zero(rank, rank);
              for (int c = 0; c < rank; ++c)
                if (F(c, a) != 0.0) dFFa += F(c, a) * dF[static_cast<std::size_t>(c)];
              for (int b = 0; b < rank; ++b) {
                Eigen::VectorXd ea = Eigen::VectorXd::Unit(rank, a);
                Eigen::VectorXd lhs = dF[static_cast<std::size_t>(a)].col(b) + dFFa * F.col(b);
                Eigen::VectorXd rhs =
                    2.0 * G(a, b) * xi - eta[b] * (ea + N3m.col(a) + eta[a] * xi);
                worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
              }
            }
            return worst;
          },
          tol));
    } else {
      rep.entries.push_back(
          skipped("contact_nabla_identities", "d eta != Omega in the half normalization"));
    }
  }

  // K-contact identities (covariant derivative of eta, co-closedness), gated on the flag.
  if (cls.flags.K_contact) {
    rep.entries.push_back(check_max(
        "K_contact_nabla_eta_equals_Omega", grid,
        [&](const Point& p) {
          Christoffels ch = conn.christoffels_at(p);
          Eigen::MatrixXd Om = Omega.eval_form2_matrix(p);
          double worst = 0.0;
          for (int a = 0; a < rank; ++a) {
            Eigen::VectorXd de = covEta.one_form_at(ch, p, a);
            for (int b = 0; b < rank; ++b) worst = std::max(worst, std::abs(de[b] - Om(a, b)));
          }
          return worst;
        },
        tol));
    rep.entries.push_back(check_max(
        "K_contact_nabla_F_xi", grid,
        [&](const Point& p) {
          Christoffels ch = conn.christoffels_at(p);
          Eigen::VectorXd xi = acs.xi.eval_vector(p);
          Eigen::VectorXd eta = acs.eta.eval_vector(p);
          double worst = 0.0;
          for (int a = 0; a < rank; ++a) {
            Eigen::VectorXd v = covF.endo_at(ch, p, a) * xi + Eigen::VectorXd::Unit(rank, a) -
                                eta[a] * xi;
            worst = std::max(worst, v.cwiseAbs().maxCoeff());
          }
          return worst;
        },
        tol));
    CovariantField covEtaForm(conn, acs.eta);
    rep.entries.push_back(check_max(
        "K_contact_eta_coclosed", grid,
        [&](const Point& p) {
          auto d_star = codifferential_at(conn, covEtaForm, p);
          return std::abs(d_star[0]);
        },
        tol));
  } else {
    rep.entries.push_back(skipped("K_contact_identities", "not K-contact"));
  }

  // Kenmotsu structure identities, gated on the flag.
  if (cls.flags.kenmotsu) {
    rep.entries.push_back(check_max(
        "kenmotsu_structure_identities", grid,
        [&](const Point& p) {
          Christoffels ch = conn.christoffels_at(p);
          Eigen::MatrixXd G = g.eval(p);
          Eigen::VectorXd eta = acs.eta.eval_vector(p);
          Eigen::MatrixXd Lg = Lxi_g.eval_matrix(p);
          TensorField LxiF = lie_derivative(acs.xi, acs.F);
          TensorField Lxieta = lie_derivative(acs.xi, acs.eta);
          double worst = 0.0;
          for (int a = 0; a < rank; ++a) {
            Eigen::VectorXd de = covEta.one_form_at(ch, p, a);
            for (int b = 0; b < rank; ++b)
              worst = std::max(worst, std::abs(de[b] - (G(a, b) - eta[a] * eta[b])));
          }
          Eigen::MatrixXd target = 2.0 * (G - eta * eta.transpose());
          worst = std::max(worst, (Lg - target).cwiseAbs().maxCoeff());
          worst = std::max(worst, LxiF.eval_matrix(p).cwiseAbs().maxCoeff());
          worst = std::max(worst, Lxieta.eval_vector(p).cwiseAbs().maxCoeff());
          return worst;
        },
        tol));
  } else {
    rep.entries.push_back(skipped("kenmotsu_structure_identities", "not Kenmotsu"));
  }

  // Covariant normality characterizations; each must agree with N1 = 0 in the
  // half normalization.
  {
    double n1 = scan_grid(grid, [&](const Point& p) { return residual_vv2(N1_half, p); }).max_abs;
    auto char_residual = [&](bool first_form) {
      return scan_grid(grid, [&](const Point& p) {
               Christoffels ch = conn.christoffels_at(p);
               Eigen::MatrixXd F = acs.F.eval_matrix(p);
               Eigen::VectorXd xi = acs.xi.eval_vector(p);
               Eigen::VectorXd eta = acs.eta.eval_vector(p);
               std::vector<Eigen::MatrixXd> dF(static_cast<std::size_t>(rank));
               for (int a = 0; a < rank; ++a) dF[static_cast<std::size_t>(a)] = covF.endo_at(ch, p, a);
               double worst = 0.0;
               for (int a = 0; a < rank; ++a) {
                 Eigen::MatrixXd dFFa = Eigen::MatrixXd::Zero(rank, rank);
                 for (int c = 0; c < rank; ++c)
                   if (F(c, a) != 0.0) dFFa += F(c, a) * dF[static_cast<std::size_t>(c)];
                 for (int b = 0; b < rank; ++b) {
                   Eigen::VectorXd r;
                   if (first_form) {
                     Eigen::VectorXd de = covEta.one_form_at(ch, p, a);
                     r = F * dF[static_cast<std::size_t>(a)].col(b) - dFFa.col(b) - de[b] * xi;
                   } else {
                     Eigen::VectorXd nxiFa = Eigen::VectorXd::Zero(rank);
                     for (int c = 0; c < rank; ++c)
                       if (F(c, a) != 0.0) nxiFa += F(c, a) * covXi.section_at(ch, p, c);
                     r = dF[static_cast<std::size_t>(a)].col(b) - dFFa * F.col(b) + eta[b] * nxiFa;
                   }
                   worst = std::max(worst, r.cwiseAbs().maxCoeff());
                 }
               }
               return worst;
             }).max_abs;
    };
    double r3 = char_residual(true);
    double r4 = char_residual(false);
    CheckResult c;
    c.name = "covariant_normality_iff_N1_zero";
    bool agree = ((r3 < tol) == (n1 < tol)) && ((r4 < tol) == (n1 < tol));
    c.value = agree ? 0.0 : 1.0;
    c.threshold = 0.5;
    c.pass = agree;
    c.note = "first form = " + fmt(r3) + ", second form = " + fmt(r4) + ", N1(half) = " + fmt(n1);
    rep.entries.push_back(c);
  }

  return rep;
}

// --- contact morphisms --------------------------------------------------------------

MorphismResult contact_morphism_check(const AlgebroidPtr& E1, const AlgebroidPtr& E2,
                                      const std::vector<std::vector<Expr>>& mu,
                                      const TensorField& eta1, const TensorField& eta2,
                                      const SampleGrid& grid) {
  int m1 = E1->rank();
  int m2 = E2->rank();
  require(E1->dim() == E2->dim(), "contact_morphism_check: different base charts");
  require(int(mu.size()) == m2, "contact_morphism_check: mu row count != rank E2");

  MorphismResult out;
  out.f_values.reserve(grid.size());
  double worst_col = 0.0, worst_ker = 0.0, min_f = -1.0, worst_strict = 0.0;
  bool agree = true;

  for (const auto& p : grid.points) {
    Eigen::MatrixXd M(m2, m1);
    for (int i = 0; i < m2; ++i)
      for (int j = 0; j < m1; ++j) M(i, j) = mu[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(p.coords);
    Eigen::VectorXd e1 = eta1.eval_vector(p);
    Eigen::VectorXd e2 = eta2.eval_vector(p);
    Eigen::VectorXd pullback = M.transpose() * e2;
    double f = pullback.dot(e1) / e1.dot(e1);
    out.f_values.push_back(f);
    double col = (pullback - f * e1).cwiseAbs().maxCoeff();
    worst_col = std::max(worst_col, col);
    min_f = min_f < 0.0 ? std::abs(f) : std::min(min_f, std::abs(f));
    worst_strict = std::max(worst_strict, std::abs(f - 1.0));

    // kernel containment: basis of ker eta1 mapped by mu must lie in ker eta2
    int pivot = 0;
    for (int i = 1; i < m1; ++i)
      if (std::abs(e1[i]) > std::abs(e1[pivot])) pivot = i;
    double ker = 0.0;
    for (int j = 0; j < m1; ++j) {
      if (j == pivot) continue;
      Eigen::VectorXd v = Eigen::VectorXd::Unit(m1, j) - (e1[j] / e1[pivot]) * Eigen::VectorXd::Unit(m1, pivot);
      ker = std::max(ker, std::abs(e2.dot(M * v)));
    }
    worst_ker = std::max(worst_ker, ker);
    agree = agree && ((col < grid.tol_eq * 10 + 1e-9) == (ker < grid.tol_eq * 10 + 1e-9));
  }

  Report rep;
  auto push = [&](const std::string& name, double value, double thr, CheckResult::Mode mode,
                  const std::string& note = "") {
    CheckResult c;
    c.name = name;
    c.value = value;
    c.threshold = thr;
    c.mode = mode;
    c.pass = mode == CheckResult::Mode::MaxBelow ? value < thr : value > thr;
    c.note = note;
    rep.entries.push_back(c);
  };
  push("morphism_collinearity", worst_col, grid.tol_eq * 10 + 1e-9, CheckResult::Mode::MaxBelow);
  push("morphism_f_nonzero", min_f, grid.tol_nonzero, CheckResult::Mode::MinAbove);
  push("morphism_kernel_containment", worst_ker, grid.tol_eq * 10 + 1e-9,
       CheckResult::Mode::MaxBelow);
  {
    CheckResult c;
    c.name = "morphism_routes_agree";
    c.value = agree ? 0.0 : 1.0;
    c.threshold = 0.5;
    c.pass = agree;
    c.note = "collinearity and kernel tests give the same verdict";
    rep.entries.push_back(c);
  }
  out.is_contact = rep.entry("morphism_collinearity").pass && rep.entry("morphism_f_nonzero").pass;
  out.strict = out.is_contact && worst_strict < grid.tol_eq * 10 + 1e-9;
  push("morphism_strict_f_equals_one", worst_strict, grid.tol_eq * 10 + 1e-9,
       CheckResult::Mode::MaxBelow, out.strict ? "strict" : "not strict");
  out.report = std::move(rep);
  return out;
}

// --- volume identity -------------------------------------------------------------------

VolumeIdentityResult volume_identity_check(const AlmostContactStructure& acs,
                                           const SampleGrid& grid) {
  require(acs.metric.has_value(), "volume_identity_check: missing metric");
  int m = acs.m();
  require(m >= 1, "volume_identity_check: rank must be at least 3");

  // The ratio is built from the actual exterior derivative (plain); the
  // declared convention decides which structures satisfy d eta = Omega and
  // therefore which constant appears.
  TensorField deta = exterior_derivative(acs.eta);
  TensorField top = wedge(acs.eta, wedge_power(deta, m));
  TensorField dV = volume_form(*acs.metric);
  const Expr& tc = top.form_canonical(0);
  const Expr& vc = dV.form_canonical(0);

  VolumeIdentityResult out;
  out.ratio = tc.eval(grid.points[0].coords) / vc.eval(grid.points[0].coords);
  Report rep;
  rep.entries.push_back(check_max(
      "volume_ratio_constant", grid,
      [&](const Point& p) {
        double r = tc.eval(p.coords) / vc.eval(p.coords);
        return std::abs(r - out.ratio) / std::max(1.0, std::abs(out.ratio));
      },
      1e-8));
  if (acs.convention == DConvention::Half) {
    double expected = std::pow(2.0, m);
    for (int k = 2; k <= m; ++k) expected *= k;
    CheckResult c;
    c.name = "volume_ratio_equals_2m_mfact";
    c.value = std::abs(std::abs(out.ratio) - expected);
    c.threshold = 1e-8 * expected;
    c.mode = CheckResult::Mode::MaxBelow;
    c.pass = c.value < c.threshold;
    c.note = "expected |ratio| = " + fmt(expected) + " under the half convention";
    rep.entries.push_back(c);
  }
  out.report = std::move(rep);
  return out;
}

}  // namespace lalg
