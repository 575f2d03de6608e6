#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acsbm/errors.hpp"
#include "acsbm/linalg.hpp"

namespace acsbm {

/// Bijection sigma on {0..K-1}; `permutation[k]` is the row matched to
/// column k, and `cost` is sum_k C(sigma(k), k).
struct Assignment {
  std::vector<int> permutation;
  double cost = 0.0;
};

namespace detail {

// Kuhn-Munkres with potentials over the sub-problem given by `rows` x
// `cols`. Returns the optimal cost and writes the matched row (position in
// `rows`) for each column position.
template <typename Derived>
double hungarian(const Eigen::MatrixBase<Derived>& c, const std::vector<int>& rows,
                 const std::vector<int>& cols, std::vector<int>* match = nullptr) {
  const int n = static_cast<int>(rows.size());
  if (n == 0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](int col, int row) {
    return static_cast<double>(c(rows[static_cast<std::size_t>(row - 1)],
                                 cols[static_cast<std::size_t>(col - 1)]));
  };
  // Columns play the role of "workers"; each is assigned a row.
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_of_col(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) row_of_col[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  double total = 0.0;
  for (int k = 0; k < n; ++k) total += cost(k + 1, row_of_col[static_cast<std::size_t>(k)] + 1);
  if (match) *match = std::move(row_of_col);
  return total;
}

}  // namespace detail

/// Minimises sum_k C(sigma(k), k) over permutations. Among optimal
/// permutations the lexicographically smallest (sigma(0), sigma(1), ...) is
/// returned, with costs within a relative 1e-10 treated as equal.
template <typename Derived>
Assignment solve_assignment(const Eigen::MatrixBase<Derived>& c) {
  detail::require_square(c, "solve_assignment");
  const int k_count = static_cast<int>(c.rows());
  for (Index i = 0; i < c.rows(); ++i) {
    for (Index j = 0; j < c.cols(); ++j) {
      if (!std::isfinite(static_cast<double>(c(i, j)))) {
        throw DomainError("solve_assignment: non-finite cost at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
      }
    }
  }
  Assignment out;
  if (k_count == 0) return out;

  std::vector<int> rows(static_cast<std::size_t>(k_count));
  std::vector<int> cols(static_cast<std::size_t>(k_count));
  for (int i = 0; i < k_count; ++i) rows[static_cast<std::size_t>(i)] = cols[static_cast<std::size_t>(i)] = i;
  const double optimum = detail::hungarian(c, rows, cols);
  const double scale = std::max(1.0, static_cast<double>(c.cwiseAbs().maxCoeff()));
  const double tol = 1e-10 * scale * k_count;

  // Fix sigma column by column, taking the smallest row that still admits
  // an optimal completion.
  out.permutation.assign(static_cast<std::size_t>(k_count), -1);
  std::vector<int> free_rows = rows;
  double fixed_cost = 0.0;
  for (int col = 0; col < k_count; ++col) {
    const std::vector<int> rest_cols(cols.begin() + col + 1, cols.end());
    bool placed = false;
    for (std::size_t r = 0; r < free_rows.size(); ++r) {
      std::vector<int> rest_rows = free_rows;
      rest_rows.erase(rest_rows.begin() + static_cast<std::ptrdiff_t>(r));
      const double here = static_cast<double>(c(free_rows[r], col));
      const double completion = detail::hungarian(c, rest_rows, rest_cols);
      if (fixed_cost + here + completion <= optimum + tol) {
        out.permutation[static_cast<std::size_t>(col)] = free_rows[r];
        fixed_cost += here;
        free_rows = std::move(rest_rows);
        placed = true;
        break;
      }
    }
    if (!placed) {
      // Unreachable in exact arithmetic; fall back to the Hungarian matching.
      std::vector<int> match;
      detail::hungarian(c, rows, cols, &match);
      out.permutation = match;
      fixed_cost = optimum;
      break;
    }
  }
  out.cost = 0.0;
  for (int k = 0; k < k_count; ++k) {
    out.cost += static_cast<double>(c(out.permutation[static_cast<std::size_t>(k)], k));
  }
  return out;
}

inline std::vector<int> inverse_permutation(const std::vector<int>& sigma) {
  std::vector<int> inv(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) inv[static_cast<std::size_t>(sigma[k])] = static_cast<int>(k);
  return inv;
}

}  // namespace acsbm
