#include <benchmark/benchmark.h>

#include <random>

#include "cited/graph.hpp"
#include "cited/model.hpp"
#include "cited/signature.hpp"
#include "cited/transport.hpp"

namespace {

using namespace cited;

struct Outputs {
  Graph graph;
  ForwardOutputs out;
};

Outputs random_outputs(std::size_t n, std::size_t boundary) {
  const std::size_t h = 16, c = 3;
  std::mt19937_64 rng(n);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < 4 * n; ++e) edges.emplace_back(pick(rng), pick(rng));
  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v % c);
  Outputs o{build_graph(n, edges, Matrix(n, 4), labels, c), {Matrix(n, h), Matrix(n, c)}};
  for (double& v : o.out.H.values()) v = g(rng);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t j = 0; j < c; ++j)
      o.out.Z(v, j) = (static_cast<int>(j) == labels[v] ? (v < boundary ? 0.01 : 5.0) : 0.0) +
                      1e-3 * g(rng);
  return o;
}

void BM_BuildSignature(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Outputs o = random_outputs(n, 60);
  BoundaryConfig cfg;
  cfg.boundary_ratio = 60.0 / static_cast<double>(n);
  for (auto _ : state) benchmark::DoNotOptimize(build_signature(o.out, o.graph, cfg));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildSignature)->RangeMultiplier(2)->Range(1000, 16000)->Complexity();

Matrix cloud(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(k, 16);
  for (double& v : m.values()) v = g(rng);
  return m;
}

void BM_W2Exact(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix p = cloud(k, 1), q = cloud(k, 2);
  for (auto _ : state) benchmark::DoNotOptimize(w2_exact(p, q));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_W2Exact)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

void BM_W2Sinkhorn(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix p = cloud(k, 1), q = cloud(k, 2);
  for (auto _ : state) benchmark::DoNotOptimize(w2_sinkhorn(p, q));
}
BENCHMARK(BM_W2Sinkhorn)->RangeMultiplier(2)->Range(16, 64);

}  // namespace

BENCHMARK_MAIN();
