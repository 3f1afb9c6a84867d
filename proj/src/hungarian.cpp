#include "strokelab/hungarian.hpp"

#include <cmath>
#include <limits>

#include "strokelab/error.hpp"

namespace strokelab {

namespace {

// Shortest augmenting path with row/column potentials, n <= m.
std::vector<int> solve(const CostMatrix& a) {
  const int n = a.rows, m = a.cols;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j]) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

Assignment hungarian_assignment(const CostMatrix& cost) {
  for (double c : cost.values)
    require(std::isfinite(c), ErrorKind::Contract, "cost matrix has a non-finite entry");
  Assignment out;
  out.row_to_col.assign(cost.rows, -1);
  if (cost.rows == 0 || cost.cols == 0) return out;

  if (cost.rows <= cost.cols) {
    out.row_to_col = solve(cost);
  } else {
    CostMatrix t(cost.cols, cost.rows);
    for (int i = 0; i < cost.rows; ++i)
      for (int j = 0; j < cost.cols; ++j) t(j, i) = cost(i, j);
    const auto col_to_row = solve(t);
    for (int j = 0; j < cost.cols; ++j) out.row_to_col[col_to_row[j]] = j;
  }
  for (int i = 0; i < cost.rows; ++i)
    if (out.row_to_col[i] >= 0) out.total += cost(i, out.row_to_col[i]);
  return out;
}

}  // namespace strokelab
