#include "cited/spectral.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "cited/error.hpp"

namespace cited {

namespace {

// Power iteration on M^T M given closures for M v and M^T u. The start
// vector comes from a fixed generator so the estimate is reproducible.
double power_iteration(std::size_t in_dim,
                       const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                       const std::function<std::vector<double>(const std::vector<double>&)>& apply_t,
                       std::size_t iters, double tol) {
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(in_dim);
  for (double& x : v) x = gauss(rng);
  double nv = euclidean_norm(v);
  for (double& x : v) x /= nv;

  double sigma = 0.0;
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<double> u = apply(v);
    const double next_sigma = euclidean_norm(u);
    if (next_sigma == 0.0) return 0.0;
    std::vector<double> w = apply_t(u);
    const double nw = euclidean_norm(w);
    if (nw == 0.0) return next_sigma;
    for (std::size_t k = 0; k < w.size(); ++k) v[k] = w[k] / nw;
    const bool converged = std::abs(next_sigma - sigma) <= tol * next_sigma;
    sigma = next_sigma;
    if (converged) break;
  }
  return euclidean_norm(apply(v));
}

}  // namespace

double spectral_norm(const Matrix& W, std::size_t iters, double tol) {
  require(!W.empty(), ErrorCode::InvalidArgument, "spectral_norm of an empty matrix");
  auto apply = [&W](const std::vector<double>& v) {
    std::vector<double> out(W.rows(), 0.0);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      auto r = W.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < W.cols(); ++j) acc += r[j] * v[j];
      out[i] = acc;
    }
    return out;
  };
  auto apply_t = [&W](const std::vector<double>& u) {
    std::vector<double> out(W.cols(), 0.0);
    for (std::size_t i = 0; i < W.rows(); ++i) {
      auto r = W.row(i);
      for (std::size_t j = 0; j < W.cols(); ++j) out[j] += r[j] * u[i];
    }
    return out;
  };
  return power_iteration(W.cols(), apply, apply_t, iters, tol);
}

double spectral_norm(const SparseMatrix& A, std::size_t iters, double tol) {
  require(A.n > 0, ErrorCode::InvalidArgument, "spectral_norm of an empty matrix");
  auto apply = [&A](const std::vector<double>& v) {
    std::vector<double> out(A.n, 0.0);
    for (std::size_t r = 0; r < A.n; ++r)
      for (std::size_t k = A.offsets[r]; k < A.offsets[r + 1]; ++k)
        out[r] += A.values[k] * v[A.indices[k]];
    return out;
  };
  auto apply_t = [&A](const std::vector<double>& u) {
    std::vector<double> out(A.n, 0.0);
    for (std::size_t r = 0; r < A.n; ++r)
      for (std::size_t k = A.offsets[r]; k < A.offsets[r + 1]; ++k)
        out[A.indices[k]] += A.values[k] * u[r];
    return out;
  };
  return power_iteration(A.n, apply, apply_t, iters, tol);
}

}  // namespace cited
