#pragma once

// One-sided Jacobi SVD (Hestenes). Slow but independent of power iteration.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cited/matrix.hpp"

namespace oracle {

inline std::vector<double> singular_values(const cited::Matrix& A) {
  const std::size_t m = A.rows();
  const std::size_t n = A.cols();
  // Work on columns of A (or of A^T when wide) so that cols <= rows.
  const bool wide = n > m;
  const std::size_t rows = wide ? n : m;
  const std::size_t cols = wide ? m : n;
  std::vector<std::vector<double>> U(cols, std::vector<double>(rows));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) (wide ? U[i][j] : U[j][i]) = A(i, j);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (std::size_t k = 0; k < rows; ++k) {
          alpha += U[p][k] * U[p][k];
          beta += U[q][k] * U[q][k];
          gamma += U[p][k] * U[q][k];
        }
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < rows; ++k) {
          const double up = U[p][k];
          const double uq = U[q][k];
          U[p][k] = c * up - s * uq;
          U[q][k] = s * up + c * uq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<double> sv;
  for (const auto& col : U) {
    double s = 0;
    for (double v : col) s += v * v;
    sv.push_back(std::sqrt(s));
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

inline double largest_singular_value(const cited::Matrix& A) { return singular_values(A).front(); }

}  // namespace oracle
