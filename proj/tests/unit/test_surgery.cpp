#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cited/error.hpp"
#include "cited/kmeans.hpp"
#include "cited/spectral.hpp"
#include "cited/surgery.hpp"
#include "oracles/jacobi_svd.hpp"
#include "support/fixtures.hpp"

using namespace cited;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = g(rng);
  return m;
}

}  // namespace

TEST_SUITE("surgery") {
  TEST_CASE("spectral norm fixtures") {
    CHECK(spectral_norm(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    Matrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 0.5;
    CHECK(spectral_norm(d) == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("spectral norm matches the Jacobi SVD oracle") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Matrix w = random_matrix(5, 4, s);
      CHECK(std::abs(spectral_norm(w) - oracle::largest_singular_value(w)) <= 1e-8);
      const Matrix wide = random_matrix(3, 7, 100 + s);
      CHECK(std::abs(spectral_norm(wide) - oracle::largest_singular_value(wide)) <= 1e-8);
    }
  }

  TEST_CASE("spectral norm bounds every Rayleigh ratio") {
    const Matrix w = random_matrix(6, 5, 9);
    const double s = spectral_norm(w);
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      Matrix v(5, 1);
      for (double& x : v.values()) x = g(rng);
      const double ratio = frobenius_norm(matmul(w, v)) / frobenius_norm(v);
      CHECK(ratio <= s * (1 + 1e-12));
    }
  }

  TEST_CASE("sparse spectral norm equals the dense one") {
    const Graph g = fixtures::random_graph(15, 2, 2, 0.3, 4);
    const SparseMatrix a = normalized_adjacency(g);
    CHECK(spectral_norm(a) == doctest::Approx(oracle::largest_singular_value(a.to_dense())).epsilon(1e-8));
  }

  TEST_CASE("prune_weights") {
    const ModelParams p = fixtures::random_params(3, 4, 2, 1);
    SUBCASE("fraction 0 is the identity") {
      const ModelParams q = prune_weights(p, 0.0);
      CHECK(q.W1 == p.W1);
      CHECK(q.W2 == p.W2);
      CHECK(q.Wc == p.Wc);
    }
    SUBCASE("fraction 1 zeroes every weight and keeps biases") {
      const ModelParams q = prune_weights(p, 1.0);
      for (const Matrix* w : {&q.W1, &q.W2, &q.Wc})
        for (double v : w->values()) CHECK(v == 0.0);
      CHECK(q.b1 == p.b1);
      CHECK(q.bc == p.bc);
    }
    SUBCASE("30% smallest magnitudes, survivors bit-exact") {
      const ModelParams q = prune_weights(p, 0.30);
      std::vector<double> mags;
      for (const Matrix* w : {&p.W1, &p.W2, &p.Wc})
        for (double v : w->values()) mags.push_back(std::abs(v));
      const std::size_t total = mags.size();
      const auto expected = static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(total)));
      std::sort(mags.begin(), mags.end());
      const double cut = mags[expected - 1];
      std::size_t zeroed = 0;
      const std::array<const Matrix*, 3> before{&p.W1, &p.W2, &p.Wc};
      const std::array<const Matrix*, 3> after{&q.W1, &q.W2, &q.Wc};
      for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t i = 0; i < before[t]->size(); ++i) {
          const double b = before[t]->values()[i];
          const double a = after[t]->values()[i];
          if (a == 0.0 && b != 0.0) {
            ++zeroed;
            CHECK(std::abs(b) <= cut);
          } else {
            CHECK(a == b);
            CHECK(std::abs(b) >= cut);
          }
        }
      CHECK(zeroed == expected);
    }
    SUBCASE("ten weights, three smallest removed") {
      ModelParams t = init_params(2, 2, 1, 0).zeros_like();
      t.W1 = Matrix(2, 2, std::vector<double>{0.5, -0.1, 0.9, 0.05});
      t.W2 = Matrix(2, 2, std::vector<double>{-0.7, 0.3, 0.6, -0.4});
      t.Wc = Matrix(2, 1, std::vector<double>{-0.2, 0.75});
      const ModelParams q = prune_weights(t, 0.3);
      CHECK(q.W1 == Matrix(2, 2, std::vector<double>{0.5, 0.0, 0.9, 0.0}));
      CHECK(q.W2 == t.W2);
      CHECK(q.Wc == Matrix(2, 1, std::vector<double>{0.0, 0.75}));
    }
  }

  TEST_CASE("perturb_params hits eta exactly") {
    const ModelParams p = fixtures::random_params(6, 5, 3, 4);
    for (double eta : {0.1, 0.25, 0.5}) {
      for (std::uint64_t seed : {1ULL, 2ULL}) {
        const PerturbedModel pm = perturb_params(p, eta, seed);
        const std::array<const Matrix*, 3> w{&p.W1, &p.W2, &p.Wc};
        const std::array<const Matrix*, 3> wt{&pm.params.W1, &pm.params.W2, &pm.params.Wc};
        double max_ratio = 0;
        for (std::size_t i = 0; i < 3; ++i) {
          Matrix u = *wt[i];
          for (std::size_t k = 0; k < u.size(); ++k) u.values()[k] -= w[i]->values()[k];
          const double wn = oracle::largest_singular_value(*w[i]);
          const double ratio = oracle::largest_singular_value(u) / wn;
          CHECK(std::abs(ratio - eta) <= 1e-8);
          CHECK(pm.rho[i] == doctest::Approx(eta * wn).epsilon(1e-10));
          max_ratio = std::max(max_ratio, ratio);
        }
        CHECK(std::abs(max_ratio - eta) <= 1e-8);
        CHECK(pm.params.b1 == p.b1);
      }
    }
  }

  TEST_CASE("perturb_params: seeds differ, rho agrees") {
    const ModelParams p = fixtures::random_params(4, 4, 2, 5);
    const PerturbedModel a = perturb_params(p, 0.2, 1);
    const PerturbedModel b = perturb_params(p, 0.2, 2);
    CHECK(a.params.W1 != b.params.W1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.rho[i] == doctest::Approx(b.rho[i]).epsilon(1e-12));
  }

  TEST_CASE("perturb_params rejects a zero weight matrix") {
    ModelParams p = fixtures::random_params(3, 3, 2, 6);
    p.W1 = Matrix(3, 3);
    try {
      perturb_params(p, 0.1, 1);
      FAIL("expected DegenerateWeight");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateWeight);
    }
  }

  TEST_CASE("kmeans separates two blobs and is deterministic") {
    Matrix pts(20, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.1);
    for (std::size_t i = 0; i < 20; ++i) {
      pts(i, 0) = (i < 10 ? -5.0 : 5.0) + g(rng);
      pts(i, 1) = g(rng);
    }
    const KMeansResult r = kmeans(pts, 2, 42);
    CHECK(r.converged);
    for (std::size_t i = 1; i < 10; ++i) CHECK(r.assignment[i] == r.assignment[0]);
    for (std::size_t i = 11; i < 20; ++i) CHECK(r.assignment[i] == r.assignment[10]);
    CHECK(r.assignment[0] != r.assignment[10]);
    const KMeansResult again = kmeans(pts, 2, 42);
    CHECK(again.assignment == r.assignment);
    CHECK(again.centroids == r.centroids);
  }
}
