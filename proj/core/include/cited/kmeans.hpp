#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cited/matrix.hpp"

namespace cited {

struct KMeansResult {
  Matrix centroids;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd's algorithm with k-means++ seeding. Stops when assignments no
/// longer change or after max_iters rounds. Empty clusters keep their
/// previous centroid.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 50);

}  // namespace cited
