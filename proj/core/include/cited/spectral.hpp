#pragma once

#include <cstddef>

#include "cited/matrix.hpp"

namespace cited {

/// Largest singular value by power iteration on W^T W. Stops once the
/// relative change of the estimate falls below `tol` or after `iters` steps.
double spectral_norm(const Matrix& W, std::size_t iters = 100, double tol = 1e-10);

/// Operator 2-norm of a square sparse matrix, same iteration.
double spectral_norm(const SparseMatrix& A, std::size_t iters = 100, double tol = 1e-10);

}  // namespace cited
