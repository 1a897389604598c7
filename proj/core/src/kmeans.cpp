#include "cited/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "cited/error.hpp"

namespace cited {

namespace {

std::size_t nearest(const Matrix& centroids, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

Matrix plus_plus_seeds(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<char> chosen(n, 0);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 0; c < k; ++c) {
    chosen[pick] = 1;
    std::copy_n(points.row(pick).begin(), points.cols(), centroids.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], squared_distance(points.row(i), centroids.row(c)));
      total += dist[i];
    }
    if (total <= 0.0) {
      // Remaining points coincide with chosen centers.
      auto it = std::find(chosen.begin(), chosen.end(), 0);
      pick = it == chosen.end() ? 0 : static_cast<std::size_t>(it - chosen.begin());
      continue;
    }
    const double target = unit(rng) * total;
    double acc = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      acc += dist[i];
      if (acc > target && dist[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters) {
  require(points.rows() > 0, ErrorCode::InvalidArgument, "kmeans needs at least one point");
  require(k >= 1 && k <= points.rows(), ErrorCode::InvalidArgument, "kmeans: k outside [1, n]");
  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = plus_plus_seeds(points, k, rng);
  const std::size_t n = points.rows();
  res.assignment.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) res.assignment[i] = nearest(res.centroids, points.row(i));

  for (std::size_t it = 0; it < max_iters; ++it) {
    Matrix sums(k, points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(res.assignment[i]);
      auto x = points.row(i);
      for (std::size_t j = 0; j < x.size(); ++j) s[j] += x[j];
      ++counts[res.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = res.centroids.row(c);
      auto s = sums.row(c);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
    }
    ++res.iterations;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = nearest(res.centroids, points.row(i));
      if (a != res.assignment[i]) {
        res.assignment[i] = a;
        changed = true;
      }
    }
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace cited
