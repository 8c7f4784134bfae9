#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "cascade_game/errors.hpp"

namespace cascade_game::lp {

using Matrix = std::vector<std::vector<double>>;

struct Solution {
  double objective = 0.0;
  std::vector<double> x;
};

// Dense primal simplex for
//
//   maximize c'x  subject to  A x <= b,  x >= 0,
//
// with b >= 0 so the slack basis is feasible from the start. Bland's rule
// on both the entering and leaving choice rules out cycling on the
// degenerate vertices matrix games produce.
inline Solution maximize(const Matrix& a, const std::vector<double>& b, const std::vector<double>& c) {
  constexpr double eps = 1e-12;
  const std::size_t m = b.size();
  const std::size_t n = c.size();
  if (a.size() != m) throw DomainError("lp: row count mismatch");
  for (const auto& row : a) {
    if (row.size() != n) throw DomainError("lp: column count mismatch");
  }
  for (double bi : b) {
    if (!(bi >= 0.0)) throw DomainError("lp: right-hand side must be non-negative");
  }

  const std::size_t cols = n + m + 1;  // structural, slack, rhs
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(a[i].begin(), a[i].end(), t[i].begin());
    t[i][n + i] = 1.0;
    t[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];

  const std::size_t max_pivots = 50 * (m + n + 10) * (m + n + 10);
  for (std::size_t iter = 0;; ++iter) {
    if (iter > max_pivots) throw Error("lp: pivot limit exceeded");
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (t[m][j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= eps) continue;
      const double ratio = t[i][cols - 1] / t[i][enter];
      if (leave == m || ratio < best_ratio - eps ||
          (ratio <= best_ratio + eps && basis[i] < basis[leave])) {
        leave = i;
        best_ratio = ratio;
      }
    }
    if (leave == m) throw Error("lp: objective unbounded");

    const double pivot = t[leave][enter];
    for (double& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[leave][j];
      t[i][enter] = 0.0;
    }
    basis[leave] = enter;
  }

  Solution out;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = std::max(0.0, t[i][cols - 1]);
  }
  out.objective = t[m][cols - 1];
  return out;
}

struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> mix;  // distribution over the minimizer's columns
};

// Optimal mixed strategy for the column player who minimizes the row
// player's best reply in a zero-sum game with payoff[row][col]:
//
//   min v  s.t.  sum_c x_c payoff[r][c] <= v for every row r,  sum x = 1, x >= 0.
//
// Entries are shifted to be >= 1, after which y = x / v turns this into
// max sum y s.t. payoff y <= 1, y >= 0.
inline MatrixGameSolution solve_column_minimizer(const Matrix& payoff) {
  if (payoff.empty() || payoff.front().empty()) throw DomainError("matrix game needs at least one row and column");
  const std::size_t cols = payoff.front().size();
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& row : payoff) {
    if (row.size() != cols) throw DomainError("ragged payoff matrix");
    for (double v : row) lowest = std::min(lowest, v);
  }
  const double shift = 1.0 - lowest;
  Matrix shifted = payoff;
  for (auto& row : shifted) {
    for (double& v : row) v += shift;
  }
  const auto sol = maximize(shifted, std::vector<double>(payoff.size(), 1.0), std::vector<double>(cols, 1.0));
  const double sum = std::accumulate(sol.x.begin(), sol.x.end(), 0.0);
  if (!(sum > 0.0)) throw Error("matrix game: degenerate LP solution");

  MatrixGameSolution out;
  out.mix.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) out.mix[j] = sol.x[j] / sum;
  // Report what the returned mix guarantees: the row player's best reply.
  out.value = -std::numeric_limits<double>::infinity();
  for (const auto& row : payoff) {
    double v = 0.0;
    for (std::size_t j = 0; j < cols; ++j) v += row[j] * out.mix[j];
    out.value = std::max(out.value, v);
  }
  return out;
}

}  // namespace cascade_game::lp
