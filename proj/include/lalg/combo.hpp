#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace lalg {

// Index combinatorics for antisymmetric tensors: degree-p components are
// stored on strictly increasing index tuples in lexicographic order.

inline std::int64_t binom(int m, int p) {
  if (p < 0 || p > m) return 0;
  std::int64_t r = 1;
  for (int i = 0; i < p; ++i) r = r * (m - i) / (i + 1);
  return r;
}

inline std::vector<std::vector<int>> combinations(int m, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > m) return out;
  std::vector<int> c(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) c[static_cast<std::size_t>(i)] = i;
  for (;;) {
    out.push_back(c);
    int i = p - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == m - p + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// Lexicographic rank of a strictly increasing tuple among C(m, p) combos.
inline int combo_rank(std::span<const int> sorted, int m) {
  int p = int(sorted.size());
  std::int64_t rank = 0;
  int prev = -1;
  for (int i = 0; i < p; ++i) {
    for (int v = prev + 1; v < sorted[static_cast<std::size_t>(i)]; ++v) rank += binom(m - v - 1, p - i - 1);
    prev = sorted[static_cast<std::size_t>(i)];
  }
  return int(rank);
}

/// Sorts `idx` in place, returning the permutation sign (0 on repeated index).
inline int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    std::size_t j = i;
    while (j > 0 && idx[j - 1] > idx[j]) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
      --j;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i - 1] == idx[i]) return 0;
  return sign;
}

}  // namespace lalg
