#pragma once

#include <vector>

namespace strokelab {

/// Dense row-major cost matrix.
struct CostMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  CostMatrix() = default;
  CostMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const {
    return values[static_cast<std::size_t>(i) * cols + j];
  }
};

struct Assignment {
  std::vector<int> row_to_col;  // -1 when the row is left unassigned (rows > cols)
  double total = 0.0;
};

/// Minimum-cost assignment. Every row is matched when rows <= cols,
/// every column when rows > cols. Throws Contract on non-finite entries.
Assignment hungarian_assignment(const CostMatrix& cost);

}  // namespace strokelab
