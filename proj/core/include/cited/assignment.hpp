#pragma once

#include <cstddef>
#include <vector>

#include "cited/matrix.hpp"

namespace cited {

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;  // sum of cost(i, row_to_col[i])
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)).
Assignment solve_assignment(const Matrix& cost);

}  // namespace cited
