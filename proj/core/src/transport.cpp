#include "cited/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cited/assignment.hpp"
#include "cited/error.hpp"

namespace cited {

namespace {

Matrix squared_cost(const Matrix& P, const Matrix& Q) {
  Matrix c(P.rows(), Q.rows());
  for (std::size_t i = 0; i < P.rows(); ++i)
    for (std::size_t j = 0; j < Q.rows(); ++j) c(i, j) = squared_distance(P.row(i), Q.row(j));
  return c;
}

// -eps * log sum_k w * exp((pot_k - cost_k) / eps), stabilized.
template <typename CostAt>
double soft_min(std::size_t count, double log_weight, const std::vector<double>& pot,
                CostAt cost_at, double eps) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) mx = std::max(mx, (pot[k] - cost_at(k)) / eps);
  double acc = 0.0;
  for (std::size_t k = 0; k < count; ++k) acc += std::exp((pot[k] - cost_at(k)) / eps - mx);
  return -eps * (log_weight + mx + std::log(acc));
}

}  // namespace

double w2_exact(const Matrix& P, const Matrix& Q) {
  require(P.rows() == Q.rows(), ErrorCode::SizeMismatch, "point sets differ in cardinality");
  require(P.cols() == Q.cols(), ErrorCode::DimMismatch, "point sets differ in dimension");
  if (P.rows() == 0) return 0.0;
  const Assignment a = solve_assignment(squared_cost(P, Q));
  return std::sqrt(std::max(a.cost, 0.0) / static_cast<double>(P.rows()));
}

EntropicTransport sinkhorn(const Matrix& P, const Matrix& Q, double eps, std::size_t iters,
                           double tol) {
  require(P.rows() > 0 && Q.rows() > 0, ErrorCode::InvalidArgument, "empty point set");
  require(P.cols() == Q.cols(), ErrorCode::DimMismatch, "point sets differ in dimension");
  require(eps > 0.0, ErrorCode::InvalidArgument, "eps must be > 0");
  const std::size_t n = P.rows();
  const std::size_t m = Q.rows();
  const Matrix C = squared_cost(P, Q);
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  std::vector<double> f(n, 0.0), g(m, 0.0);

  EntropicTransport out;
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i)
      f[i] = soft_min(m, log_b, g, [&](std::size_t j) { return C(i, j); }, eps);
    for (std::size_t j = 0; j < m; ++j)
      g[j] = soft_min(n, log_a, f, [&](std::size_t i) { return C(i, j); }, eps);
    ++out.iterations;

    // Columns are exact after the g update; measure the row marginals.
    double violation = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        row += std::exp(log_a + log_b + (f[i] + g[j] - C(i, j)) / eps);
      violation += std::abs(row - std::exp(log_a));
    }
    out.marginal_violation.push_back(violation);
    if (violation < tol) {
      out.converged = true;
      break;
    }
  }
  double value = 0.0;
  for (double x : f) value += x / static_cast<double>(n);
  for (double x : g) value += x / static_cast<double>(m);
  out.cost = value;
  return out;
}

SinkhornW2 w2_sinkhorn(const Matrix& P, const Matrix& Q, double eps, std::size_t iters) {
  const EntropicTransport pq = sinkhorn(P, Q, eps, iters);
  const EntropicTransport pp = sinkhorn(P, P, eps, iters);
  const EntropicTransport qq = sinkhorn(Q, Q, eps, iters);
  SinkhornW2 out;
  out.divergence = pq.cost - 0.5 * (pp.cost + qq.cost);
  out.value = std::sqrt(std::max(out.divergence, 0.0));
  out.converged = pq.converged && pp.converged && qq.converged;
  out.iterations = pq.iterations;
  return out;
}

}  // namespace cited
