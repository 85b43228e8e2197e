#include "brepchain/matching.hpp"

#include <cmath>
#include <limits>

namespace brepchain {

namespace {

// Shortest augmenting path with potentials; requires rows <= cols.
std::vector<int> solve_wide(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows()), m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(m) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(m) + 1, 0), way(static_cast<size_t>(m) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<size_t>(m) + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
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
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(static_cast<size_t>(n), -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment hungarian_match(const Eigen::MatrixXd& cost) {
  for (Eigen::Index i = 0; i < cost.size(); ++i)
    if (!std::isfinite(cost.data()[i])) throw ArgumentError("hungarian_match: cost matrix has a non-finite entry");
  Assignment out;
  const int rows = static_cast<int>(cost.rows()), cols = static_cast<int>(cost.cols());
  out.row_to_col.assign(static_cast<size_t>(rows), -1);
  if (rows == 0 || cols == 0) return out;
  if (rows <= cols) {
    out.row_to_col = solve_wide(cost);
  } else {
    std::vector<int> col_to_row = solve_wide(cost.transpose());
    for (int j = 0; j < cols; ++j)
      if (col_to_row[j] >= 0) out.row_to_col[col_to_row[j]] = j;
  }
  for (int i = 0; i < rows; ++i)
    if (out.row_to_col[i] >= 0) out.total_cost += cost(i, out.row_to_col[i]);
  return out;
}

}  // namespace brepchain
