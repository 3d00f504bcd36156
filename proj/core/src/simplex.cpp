#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace ncp::detail {

namespace {

// tableau: rows 0..m-1 constraints, row m the (maximisation) objective,
// column layout [vars | slacks | artificials | rhs]
struct Tableau {
  std::vector<std::vector<double>> t;
  std::vector<std::size_t> basis;  // basic column per constraint row
  std::size_t rows, cols;          // constraint rows, total columns incl. rhs
  double eps;

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = t[pr][pc];
    for (std::size_t j = 0; j < cols; ++j) t[pr][j] /= pv;
    for (std::size_t i = 0; i <= rows; ++i) {
      if (i == pr) continue;
      const double f = t[i][pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= f * t[pr][j];
    }
    basis[pr] = pc;
  }

  // Bland's rule: smallest eligible entering column, smallest basis leaving.
  // Returns false when the objective row has no negative entry (optimal).
  bool step(std::size_t usable_cols, bool* unbounded) {
    std::size_t enter = usable_cols;
    for (std::size_t j = 0; j < usable_cols; ++j) {
      if (t[rows][j] < -eps) { enter = j; break; }
    }
    if (enter == usable_cols) return false;

    std::size_t leave = rows;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows; ++i) {
      if (t[i][enter] > eps) {
        const double ratio = t[i][cols - 1] / t[i][enter];
        if (ratio < best_ratio - eps ||
            (ratio < best_ratio + eps && (leave == rows || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave == rows) {
      *unbounded = true;
      return false;
    }
    pivot(leave, enter);
    return true;
  }
};

}  // namespace

LPResult solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                  const std::vector<double>& c, double eps) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();

  // count artificials: rows with negative rhs get their row negated and an
  // artificial basic variable
  std::vector<bool> needs_art(m, false);
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < 0.0) { needs_art[i] = true; ++n_art; }

  Tableau tab;
  tab.rows = m;
  tab.cols = n + m + n_art + 1;
  tab.eps = eps;
  tab.t.assign(m + 1, std::vector<double>(tab.cols, 0.0));
  tab.basis.assign(m, 0);

  std::size_t art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = needs_art[i] ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) tab.t[i][j] = sign * A[i][j];
    tab.t[i][n + i] = sign;  // slack
    tab.t[i][tab.cols - 1] = sign * b[i];
    if (needs_art[i]) {
      tab.t[i][n + m + art] = 1.0;
      tab.basis[i] = n + m + art;
      ++art;
    } else {
      tab.basis[i] = n + i;
    }
  }

  const std::size_t all_cols = n + m + n_art;

  if (n_art > 0) {
    // phase 1: minimise the artificial sum; objective row starts as
    // +1 on artificials, then reduce against the artificial basis rows
    for (std::size_t j = 0; j < n_art; ++j) tab.t[m][n + m + j] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!needs_art[i]) continue;
      for (std::size_t j = 0; j < tab.cols; ++j) tab.t[m][j] -= tab.t[i][j];
    }
    bool unbounded = false;
    while (tab.step(all_cols, &unbounded)) {}
    const double art_sum = -tab.t[m][tab.cols - 1];
    if (art_sum > eps * 10) return {LPResult::Status::infeasible, 0.0, {}};

    // drive any degenerate artificial out of the basis
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis[i] < n + m) continue;
      for (std::size_t j = 0; j < n + m; ++j) {
        if (std::abs(tab.t[i][j]) > eps) { tab.pivot(i, j); break; }
      }
    }
  }

  // phase 2 objective (zero out artificial columns so they stay out)
  for (std::size_t j = 0; j < tab.cols; ++j) tab.t[m][j] = 0.0;
  for (std::size_t j = n + m; j < all_cols; ++j)
    for (std::size_t i = 0; i <= m; ++i) tab.t[i][j] = 0.0;
  for (std::size_t j = 0; j < n; ++j) tab.t[m][j] = -c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const double coef = tab.t[m][tab.basis[i]];
    if (coef == 0.0) continue;
    for (std::size_t j = 0; j < tab.cols; ++j) tab.t[m][j] -= coef * tab.t[i][j];
  }

  bool unbounded = false;
  while (tab.step(n + m, &unbounded)) {}
  if (unbounded) return {LPResult::Status::unbounded, 0.0, {}};

  LPResult res;
  res.status = LPResult::Status::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.t[i][tab.cols - 1];
  res.value = tab.t[m][tab.cols - 1];
  return res;
}

}  // namespace ncp::detail
