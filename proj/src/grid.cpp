#include "lalg/grid.hpp"

namespace lalg {
namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

// Radical-inverse of `index` in the given base.
double radical_inverse(unsigned long long index, int base) {
  double inv = 1.0 / base;
  double value = 0.0;
  double factor = inv;
  while (index > 0) {
    value += double(index % unsigned(base)) * factor;
    index /= unsigned(base);
    factor *= inv;
  }
  return value;
}

}  // namespace

std::vector<Point> halton_points(const std::vector<std::pair<double, double>>& box,
                                 std::size_t count, unsigned seed) {
  const std::size_t dim = box.size();
  if (dim > sizeof(kPrimes) / sizeof(kPrimes[0]))
    throw std::invalid_argument("halton_points: dimension too large");
  std::vector<Point> pts;
  pts.reserve(count);
  // The seed shifts the start index; the leading entries of a Halton sequence
  // are skipped anyway because they cluster near the box corner.
  unsigned long long start = 31 + 97ull * seed;
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> c(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double u = radical_inverse(start + k, kPrimes[d]);
      c[d] = box[d].first + u * (box[d].second - box[d].first);
    }
    pts.emplace_back(std::move(c));
  }
  return pts;
}

SampleGrid make_grid(const Chart& chart, std::size_t count, unsigned seed, double tol_eq,
                     double tol_nonzero) {
  if (chart.box.size() != chart.dim())
    throw std::invalid_argument("make_grid: box/variable dimension mismatch");
  return SampleGrid(halton_points(chart.box, count, seed), tol_eq, tol_nonzero);
}

}  // namespace lalg
