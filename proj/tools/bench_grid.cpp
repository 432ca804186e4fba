// Timing comparison of the serial and OpenMP grid-scan paths. The symbolic
// assembly of the kernels is done once outside the timed region; what is
// measured is the per-point evaluation sweep.

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>

#include "lalg/bigtangent.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double run_ms(const std::function<void()>& fn) {
  auto t0 = Clock::now();
  fn();
  auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

lalg::AlgebroidPtr so3_algebroid() {
  lalg::Chart chart;
  chart.variables = {"x1", "x2", "x3"};
  chart.box = {{-1, 1}, {-1, 1}, {-1, 1}};
  auto E = [&](const char* s) { return lalg::parse_expr(s, chart.variables); };
  std::vector<std::vector<lalg::Expr>> anchor = {
      {E("0"), E("-x3"), E("x2")}, {E("x3"), E("0"), E("-x1")}, {E("-x2"), E("x1"), E("0")}};
  std::vector<std::vector<std::vector<lalg::Expr>>> C(
      3, std::vector<std::vector<lalg::Expr>>(3, std::vector<lalg::Expr>(3)));
  C[0][1][2] = E("-1");
  C[1][0][2] = E("1");
  C[1][2][0] = E("-1");
  C[2][1][0] = E("1");
  C[2][0][1] = E("-1");
  C[0][2][1] = E("1");
  return lalg::make_algebroid(chart, 3, std::move(anchor), std::move(C));
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
  std::cout << std::left << std::setw(40) << name << std::right << std::fixed
            << std::setprecision(1) << std::setw(9) << serial_ms << " ms" << std::setw(9)
            << parallel_ms << " ms" << std::setw(8) << std::setprecision(2)
            << serial_ms / parallel_ms << "x\n";
}

void compare(const std::string& name, const lalg::SampleGrid& grid,
             const lalg::PointKernel& kernel) {
  lalg::ScanResult rs, rp;
  lalg::set_parallel_scan(false);
  double ts = run_ms([&] { rs = lalg::scan_grid(grid, kernel); });
  lalg::set_parallel_scan(true);
  double tp = run_ms([&] { rp = lalg::scan_grid(grid, kernel); });
  if (rs.max_abs != rp.max_abs || rs.worst_index != rp.worst_index) {
    std::cerr << "serial/parallel mismatch in " << name << "\n";
    std::exit(1);
  }
  row(name, ts, tp);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t points = argc > 1 ? std::size_t(std::stoul(argv[1])) : 20000;

  std::cout << std::left << std::setw(40) << "kernel" << std::right << std::setw(12) << "serial"
            << std::setw(12) << "parallel" << std::setw(9) << "speedup\n";

  {
    // d^2 residual of a fixed 1-form on the so(3) action algebroid: the
    // anchor derivatives keep the component expressions genuinely nontrivial
    auto E = so3_algebroid();
    auto e = [&](const char* s) { return lalg::parse_expr(s, E->chart().variables); };
    lalg::SampleGrid grid = lalg::make_grid(E->chart(), points, 11);
    lalg::TensorField w = lalg::TensorField::one_form(
        E, {e("x1*x2 - x3^2/2"), e("sin(x1) + x2*x3"), e("exp(x2/2) - x1*x3")});
    lalg::TensorField ddw = exterior_derivative(exterior_derivative(w));
    compare("so3 d^2 residual x " + std::to_string(points), grid, [&](const lalg::Point& p) {
      double worst = 0.0;
      for (double v : ddw.eval_form(p)) worst = std::max(worst, std::abs(v));
      return worst;
    });
  }
  {
    // framed-structure defect of the big-tangent vertical geometry
    int n = 2;
    std::vector<std::string> xvars = {"x1", "x2"};
    auto E = [&](const char* s) { return lalg::parse_expr(s, xvars); };
    std::vector<std::vector<lalg::Expr>> g = {{E("1 + x1^2"), E("0")}, {E("0"), E("1")}};
    std::vector<std::pair<double, double>> box(std::size_t(3 * n), {-1.5, 1.5});
    lalg::BigTangentModel M = lalg::build_big_tangent(n, g, box);
    lalg::SampleGrid grid = lalg::big_tangent_grid(M, points / 4 + 1, 11);
    lalg::TensorField f =
        M.phi - outer(M.omega2, M.xi1) + outer(M.omega1, M.xi2);
    lalg::TensorField res = compose_endo(f, f) + lalg::TensorField::identity_endomorphism(M.V) -
                            outer(M.omega1, M.xi1) - outer(M.omega2, M.xi2);
    compare("big-tangent f^2 defect x " + std::to_string(grid.size()), grid,
            [&](const lalg::Point& p) { return res.eval_matrix(p).cwiseAbs().maxCoeff(); });
  }
  return 0;
}
