#pragma once

#include <cstddef>
#include <vector>

#include "cited/matrix.hpp"

namespace cited {

/// Exact 2-Wasserstein distance between two equal-size uniform point clouds
/// (rows of P and Q): sqrt(min_perm (1/k) sum ||P_i - Q_perm(i)||^2).
/// Throws SizeMismatch on differing row counts and DimMismatch on
/// differing widths.
double w2_exact(const Matrix& P, const Matrix& Q);

/// Entropic OT between uniform clouds of possibly different sizes.
struct EntropicTransport {
  double cost = 0.0;  // dual value <a,f> + <b,g>
  bool converged = false;
  std::size_t iterations = 0;
  /// L1 row-marginal violation after each full iteration.
  std::vector<double> marginal_violation;
};

/// Log-domain Sinkhorn. Converged when the marginal violation drops below
/// `tol`.
EntropicTransport sinkhorn(const Matrix& P, const Matrix& Q, double eps, std::size_t iters,
                           double tol = 1e-9);

struct SinkhornW2 {
  double value = 0.0;       // sqrt of the clamped divergence
  double divergence = 0.0;  // OT(P,Q) - (OT(P,P) + OT(Q,Q)) / 2
  bool converged = false;   // all three solves converged
  std::size_t iterations = 0;
};

/// Debiased Sinkhorn divergence on squared Euclidean cost, reported on the
/// W2 scale. Non-convergence is flagged, not thrown.
SinkhornW2 w2_sinkhorn(const Matrix& P, const Matrix& Q, double eps = 0.05,
                       std::size_t iters = 500);

}  // namespace cited
