// Acceptance suite: one pass/fail line per criterion. Usage:
//   acceptance <path-to-cli-binary> <path-to-fixtures-dir>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "fixtures.hpp"
#include "lalg/bigtangent.hpp"
#include "lalg/manifest.hpp"
#include "lalg/product.hpp"

using namespace lalg;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli;
std::string g_fixtures;
int g_failures = 0;

void criterion(int number, const std::string& title, const std::function<bool(std::string&)>& fn) {
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", number, title.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  RunResult r;
  std::string cmd = g_cli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

double max_abs_form(const TensorField& t, const Point& p) {
  double worst = 0.0;
  for (double v : t.eval_form(p)) worst = std::max(worst, std::abs(v));
  return worst;
}

// d^2 = 0, Jacobi, anchor morphism and Leibniz residuals on one algebroid
double calculus_core_residual(const AlgebroidPtr& E, const SampleGrid& grid, unsigned seed) {
  double worst = 0.0;
  Report v = validate(*E, grid);
  for (const auto& e : v.entries) worst = std::max(worst, e.value);

  std::mt19937 rng(seed);
  TensorField w = fixtures::random_form(E, 1, rng);
  TensorField ddw = exterior_derivative(exterior_derivative(w));
  worst = std::max(worst, scan_grid(grid, [&](const Point& p) {
                     return max_abs_form(ddw, p);
                   }).max_abs);

  // Leibniz rule on random data
  TensorField s1 = fixtures::random_section(E, rng);
  TensorField s2 = fixtures::random_section(E, rng);
  Expr f = fixtures::random_poly(E->chart(), rng);
  std::vector<Expr> fs2;
  for (int c = 0; c < E->rank(); ++c) fs2.push_back(f * s2.section_component(c));
  TensorField lhs = bracket(s1, TensorField::section(E, fs2));
  TensorField br = bracket(s1, s2);
  Expr df = anchor_apply_expr(s1, f);
  std::vector<Expr> rhs;
  for (int c = 0; c < E->rank(); ++c)
    rhs.push_back(f * br.section_component(c) + df * s2.section_component(c));
  TensorField res = lhs - TensorField::section(E, rhs);
  worst = std::max(worst, scan_grid(grid, [&](const Point& p) {
                     return res.eval_vector(p).cwiseAbs().maxCoeff();
                   }).max_abs);
  return worst;
}

BigTangentModel bigtangent_model(bool curved) {
  std::vector<std::string> xvars = {"x1", "x2"};
  auto e = [&](const std::string& s) { return parse_expr(s, xvars); };
  std::vector<std::vector<Expr>> g = {{curved ? e("1 + x1^2") : e("1"), e("0")},
                                      {e("0"), e("1")}};
  std::vector<std::pair<double, double>> box(6, {-1.5, 1.5});
  return build_big_tangent(2, g, box);
}

// random constant + linear coefficient for the induced-structure inputs
Expr affine_coeff(const Chart& chart, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-0.6, 0.6);
  std::uniform_int_distribution<int> pick(0, int(chart.dim()) - 1);
  int v = pick(rng);
  return Expr::constant(dist(rng)) +
         Expr::constant(0.3 * dist(rng)) *
             Expr::variable(v, chart.variables[static_cast<std::size_t>(v)]);
}

bool induced_structure_case(int rank, unsigned seed, std::string& detail) {
  Chart chart;
  for (int i = 1; i <= rank; ++i) {
    chart.variables.push_back("x" + std::to_string(i));
    chart.box.push_back({-1.0, 1.0});
  }
  AlgebroidPtr E = LieAlgebroid::tangent(chart);
  std::mt19937 rng(seed);
  std::vector<std::vector<Expr>> om(static_cast<std::size_t>(rank),
                                    std::vector<Expr>(static_cast<std::size_t>(rank)));
  for (int a = 0; a < rank; ++a)
    for (int b = a + 1; b < rank; ++b)
      om[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = affine_coeff(chart, rng);
  TensorField Omega = TensorField::form2(E, om);
  std::vector<Expr> ev;
  for (int a = 0; a < rank; ++a) ev.push_back(affine_coeff(chart, rng));
  TensorField eta = TensorField::one_form(E, std::move(ev));
  // constant SPD metric
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  Eigen::MatrixXd A(rank, rank);
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) A(i, j) = dist(rng);
  Eigen::MatrixXd H = A.transpose() * A + Eigen::MatrixXd::Identity(rank, rank);
  std::vector<std::vector<Expr>> h(static_cast<std::size_t>(rank),
                                   std::vector<Expr>(static_cast<std::size_t>(rank)));
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j)
      h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Expr::constant(H(i, j));

  SampleGrid grid = make_grid(chart, 50, 13);
  InducedStructure s = induce_from_pair(E, eta, Omega, BundleMetric{E, std::move(h)}, grid);
  double ii1 = s.report.entry("induced_II1_residual").value;
  double cosine = s.report.entry("kernel_vs_permutation_oracle_cosine").value;
  std::ostringstream os;
  os << "rank " << rank << ": II1 " << ii1 << ", oracle cosine defect " << (1.0 - cosine);
  detail += os.str() + "; ";
  return s.report.all_pass() && ii1 < 1e-8 && cosine > 1.0 - 1e-9;
}

AlmostContactStructure perturbed_fixture(double scale) {
  auto acs = fixtures::tr3_contact_plain();
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> noise(-scale, scale);
  std::vector<std::vector<Expr>> comps(3, std::vector<Expr>(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      comps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          acs.F.endo_component(i, j) + Expr::constant(noise(rng));
  acs.F = TensorField::endomorphism(acs.owner, std::move(comps));
  return acs;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cli-binary> <fixtures-dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_fixtures = argv[2];
  auto fixture = [](const std::string& n) { return g_fixtures + "/" + n; };

  criterion(1, "calculus core on five fixtures (< 1e-9, < 10 s)", [&](std::string& detail) {
    auto t0 = Clock::now();
    double worst = 0.0;
    worst = std::max(worst, calculus_core_residual(
                                fixtures::tangent_r1(),
                                make_grid(fixtures::tangent_r1()->chart(), 50, 2), 11));
    worst = std::max(worst, calculus_core_residual(
                                fixtures::tangent_r3(),
                                make_grid(fixtures::tangent_r3()->chart(), 50, 3), 12));
    worst = std::max(worst, calculus_core_residual(
                                fixtures::so3_action(),
                                make_grid(fixtures::so3_action()->chart(), 50, 4), 13));
    Chart c1;
    c1.variables = {"t1"};
    c1.box = {{-1.0, 1.0}};
    ProductAlgebroid P = direct_product(fixtures::so3_action(), LieAlgebroid::tangent(c1));
    worst = std::max(worst, calculus_core_residual(
                                P.combined, make_grid(P.combined->chart(), 50, 5), 14));
    BigTangentModel M = bigtangent_model(false);
    worst = std::max(worst, calculus_core_residual(M.V, big_tangent_grid(M, 50, 6), 15));
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream os;
    os << "max residual " << worst << ", " << secs << " s";
    detail = os.str();
    return worst < 1e-9 && secs < 10.0;
  });

  criterion(2, "compatible-metric synthesis (< 1e-10)", [&](std::string& detail) {
    auto base = fixtures::tr3_contact_plain();
    AlmostContactStructure acs{base.owner, base.F, base.xi, base.eta, std::nullopt,
                               DConvention::Plain};
    acs.metric = build_compatible_metric(acs, BundleMetric::euclidean(base.owner));
    SampleGrid grid = make_grid(base.owner->chart(), 50, 7, 1e-10);
    Report r = check_compatibility(acs, grid);
    double worst = std::max({r.entry("metric_compatibility").value,
                             r.entry("eta_is_metric_dual_of_xi").value,
                             r.entry("F_plus_eta_xi_orthogonal").value,
                             r.entry("F_skew_adjoint").value});
    std::ostringstream os;
    os << "max residual " << worst;
    detail = os.str();
    return r.all_pass() && worst < 1e-10;
  });

  criterion(3, "Reeb solver recovers (0,0,1) (< 1e-10)", [&](std::string& detail) {
    auto acs = fixtures::tr3_contact_plain();
    SampleGrid grid = make_grid(acs.owner->chart(), 50, 8, 1e-10);
    ReebResult r = reeb_section(acs.owner, acs.eta, grid);
    double worst = r.report.entry("reeb_defining_conditions").value;
    for (const auto& v : r.values)
      worst = std::max(worst, (v - Eigen::Vector3d(0, 0, 1)).cwiseAbs().maxCoeff());
    std::ostringstream os;
    os << "max deviation " << worst;
    detail = os.str();
    return worst < 1e-10;
  });

  criterion(4, "induced structure from (eta, Omega, h) with kernel oracle", [&](std::string& d) {
    bool ok3 = induced_structure_case(3, 21, d);
    bool ok5 = induced_structure_case(5, 23, d);
    return ok3 && ok5;
  });

  criterion(5, "classification ladder", [&](std::string& detail) {
    Manifest sas = load_manifest(fixture("tr3_sasakian.json"));
    Classification cs = classify(*sas.structure, sas.grid(), sas.tol_classify);
    bool ok = cs.flags.contact_riemannian && cs.flags.K_contact && cs.flags.sasakian &&
              cs.flags.normal;

    Manifest ken = load_manifest(fixture("kenmotsu.json"));
    Classification ck = classify(*ken.structure, ken.grid(), ken.tol_classify);
    ok = ok && ck.flags.kenmotsu && !ck.flags.K_contact;

    auto bad = perturbed_fixture(1e-3);
    SampleGrid grid = make_grid(bad.owner->chart(), 50, 9);
    Report r = check_almost_contact(bad, grid);
    double res = r.entry("F_squared_identity").value;
    Classification cb = classify(bad, grid);
    ok = ok && !cb.flags.almost_contact && res >= 1e-4 && res <= 1e-2;
    std::ostringstream os;
    os << "perturbation residual " << res;
    detail = os.str();
    return ok;
  });

  criterion(6, "theorem-implication suite, never vacuous (< 1e-8)", [&](std::string& detail) {
    double worst = 0.0;
    Manifest sas = load_manifest(fixture("tr3_sasakian.json"));
    const AlmostContactStructure& acs = *sas.structure;
    SampleGrid grid = sas.grid();
    Classification cls = classify(acs, grid, sas.tol_classify);
    // hypotheses hold non-vacuously
    if (!cls.flags.sasakian || !cls.flags.K_contact || !cls.flags.contact_riemannian)
      return false;
    worst = std::max(worst, cls.report.entry("K_contact_nabla_xi_plus_F").value);  // Sasakian implies K-contact
    worst = std::max(worst, cls.report.entry("sasakian_nabla_F_identity").value);  // rank-3 K-contact implies Sasakian
    Connection conn = levi_civita(acs.owner, *acs.metric);
    Report ids = check_identities(acs, conn, grid, cls);
    worst = std::max(worst, ids.entry("contact_N2_zero").value);
    worst = std::max(worst, ids.entry("contact_N4_zero").value);
    worst = std::max(worst, ids.entry("K_contact_eta_coclosed").value);

    Manifest ken = load_manifest(fixture("kenmotsu.json"));
    SampleGrid kgrid = ken.grid();
    Classification ck = classify(*ken.structure, kgrid, ken.tol_classify);
    if (!ck.flags.kenmotsu) return false;
    Connection kconn = levi_civita(ken.algebroid, *ken.structure->metric);
    Report kids = check_identities(*ken.structure, kconn, kgrid, ck);
    worst = std::max(worst, kids.entry("kenmotsu_structure_identities").value);
    std::ostringstream os;
    os << "max residual " << worst;
    detail = os.str();
    return worst < 1e-8;
  });

  criterion(7, "master covariant formula on normal and non-normal fixtures", [&](std::string& d) {
    double worst = 0.0;
    for (const char* name : {"tr3_sasakian.json", "nonnormal.json"}) {
      Manifest mf = load_manifest(fixture(name));
      SampleGrid grid = mf.grid();
      Classification cls = classify(*mf.structure, grid, mf.tol_classify);
      Connection conn = levi_civita(mf.algebroid, *mf.structure->metric);
      Report ids = check_identities(*mf.structure, conn, grid, cls, 2024, 20);
      worst = std::max(worst, ids.entry("covariant_master_formula").value);
    }
    std::ostringstream os;
    os << "max residual " << worst;
    d = os.str();
    return worst < 1e-8;
  });

  criterion(8, "volume identity: constant ratio, 2^m m! under half convention",
            [&](std::string& detail) {
              Manifest plain = load_manifest(fixture("tr3.json"));
              SampleGrid grid = plain.grid();
              VolumeIdentityResult r1 = volume_identity_check(*plain.structure, grid);
              Manifest half = load_manifest(fixture("tr3_sasakian.json"));
              VolumeIdentityResult r2 = volume_identity_check(*half.structure, half.grid());
              std::ostringstream os;
              os << "ratios " << r1.ratio << " and " << r2.ratio;
              detail = os.str();
              return r1.report.all_pass() && r2.report.all_pass() &&
                     std::abs(std::abs(r2.ratio) - 2.0) < 1e-8;
            });

  criterion(9, "big-tangent suite, flat and curved base (< 1e-8, < 60 s)",
            [&](std::string& detail) {
              auto t0 = Clock::now();
              bool ok = true;
              double worst = 0.0;
              for (bool curved : {false, true}) {
                BigTangentModel M = bigtangent_model(curved);
                SampleGrid grid = big_tangent_grid(M, 50, 10, 0.5, 1e-8);
                FramedFStructure f = framed_f_structure(M, grid);
                PhiFormResult phi = phi_form_and_decomposition(M, grid);
                LiouvilleRestriction rest = liouville_restriction(M, grid);
                Report contact = verify_contact_on_restriction(M, rest, grid);
                ok = ok && f.report.all_pass() && phi.report.all_pass() &&
                     rest.report.all_pass() && contact.all_pass();
                for (const Report* rep : {&f.report, &phi.report, &rest.report, &contact})
                  for (const auto& e : rep->entries)
                    if (e.mode == CheckResult::Mode::MaxBelow)
                      worst = std::max(worst, e.value);
              }
              double secs = std::chrono::duration<double>(Clock::now() - t0).count();
              std::ostringstream os;
              os << "max residual " << worst << ", " << secs << " s";
              detail = os.str();
              return ok && worst < 1e-8 && secs < 60.0;
            });

  criterion(10, "finite-difference oracle for every fixture expression", [&](std::string& detail) {
    const double h = 1e-5;
    double worst = 0.0;
    int checked = 0;
    for (const char* name : {"tr1.json", "tr3.json", "so3.json", "tr3_sasakian.json",
                             "tr5_sasakian.json", "kenmotsu.json", "nonnormal.json",
                             "broken_jacobi.json"}) {
      Manifest mf = load_manifest(fixture(name));
      const Chart& chart = mf.algebroid->chart();
      int n = int(chart.dim());
      int m = mf.algebroid->rank();
      std::vector<Expr> exprs;
      for (int a = 0; a < m; ++a)
        for (int i = 0; i < n; ++i) exprs.push_back(mf.algebroid->anchor(a, i));
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c) exprs.push_back(mf.algebroid->structure(a, b, c));
      if (mf.structure.has_value()) {
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) exprs.push_back(mf.structure->F.endo_component(i, j));
        for (int i = 0; i < m; ++i) {
          exprs.push_back(mf.structure->xi.section_component(i));
          exprs.push_back(mf.structure->eta.form_canonical(i));
        }
        if (mf.structure->metric.has_value())
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) exprs.push_back((*mf.structure->metric)(i, j));
      }
      // interior points so the central stencil stays inside the chart box
      std::vector<std::pair<double, double>> inset = chart.box;
      for (auto& b : inset) {
        b.first += 1e-3;
        b.second -= 1e-3;
      }
      auto pts = halton_points(inset, 100, 31);
      for (const Expr& e : exprs) {
        if (e.is_constant()) continue;
        for (int v = 0; v < n; ++v) {
          Expr de = e.derivative(v);
          for (const auto& p : pts) {
            std::vector<double> hi = p.coords, lo = p.coords;
            hi[static_cast<std::size_t>(v)] += h;
            lo[static_cast<std::size_t>(v)] -= h;
            double fd = (e.eval(hi) - e.eval(lo)) / (2 * h);
            double sym = de.eval(p.coords);
            worst = std::max(worst, std::abs(sym - fd) / std::max(1.0, std::abs(sym)));
          }
          ++checked;
        }
      }
    }
    std::ostringstream os;
    os << checked << " derivative checks, worst relative error " << worst;
    detail = os.str();
    return worst < 1e-6;
  });

  criterion(11, "CLI contract: deterministic JSON and 0/1/2 exit codes", [&](std::string& detail) {
    bool ok = true;
    // byte-identical JSON across two runs with the same seed
    for (const std::string& args :
         {std::string("validate ") + fixture("tr3.json") + " --json --seed 5",
          std::string("classify ") + fixture("tr3_sasakian.json") + " --json --seed 5",
          std::string("bigtangent --metric ") + fixture("bigtangent_flat.json") +
              " --json --grid 12 --seed 5"}) {
      RunResult a = run_cli(args);
      RunResult b = run_cli(args);
      ok = ok && a.exit_code == 0 && a.output == b.output && !a.output.empty();
    }
    // exit-code contract on the gallery
    ok = ok && run_cli("validate " + fixture("tr3.json")).exit_code == 0;
    ok = ok && run_cli("validate " + fixture("so3.json")).exit_code == 0;
    ok = ok && run_cli("validate " + fixture("broken_jacobi.json")).exit_code == 1;
    ok = ok && run_cli("validate /nonexistent_manifest.json").exit_code == 2;
    std::string tmp = "/tmp/lalg_acceptance_malformed.json";
    std::ofstream(tmp) << "{ broken";
    ok = ok && run_cli("validate " + tmp).exit_code == 2;
    ok = ok && run_cli("classify " + fixture("tr3_sasakian.json")).exit_code == 0;
    ok = ok && run_cli("classify " + fixture("kenmotsu.json")).exit_code == 0;
    ok = ok && run_cli("classify " + fixture("tr1.json")).exit_code == 2;  // no structure block
    ok = ok && run_cli("bigtangent --metric " + fixture("bigtangent_nonpd.json")).exit_code == 1;
    // overriding the convention flips the contact_riemannian flag
    RunResult plain = run_cli("classify " + fixture("tr3_sasakian.json") +
                              " --json --convention plain");
    RunResult half = run_cli("classify " + fixture("tr3_sasakian.json") + " --json");
    ok = ok && plain.output.find("\"contact_riemannian\": false") != std::string::npos;
    ok = ok && half.output.find("\"contact_riemannian\": true") != std::string::npos;
    detail = "three commands, two runs each, gallery exit codes";
    return ok;
  });

  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
