#pragma once

#include <random>
#include <vector>

#include "cited/graph.hpp"
#include "cited/model.hpp"
#include "cited/pipeline.hpp"

namespace fixtures {

/// Random graph with Gaussian features and uniform labels.
inline cited::Graph random_graph(std::size_t n, std::size_t d0, std::size_t c, double p,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution edge(p);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> label(0, static_cast<int>(c) - 1);
  std::vector<cited::Edge> edges;
  for (cited::NodeId u = 0; u < n; ++u)
    for (cited::NodeId v = u + 1; v < n; ++v)
      if (edge(rng)) edges.emplace_back(u, v);
  cited::Matrix X(n, d0);
  for (double& x : X.values()) x = gauss(rng);
  std::vector<int> labels(n);
  for (int& y : labels) y = label(rng);
  return cited::build_graph(n, edges, std::move(X), std::move(labels), c);
}

/// init_params with the biases also randomized so every gradient is exercised.
inline cited::ModelParams random_params(std::size_t d0, std::size_t h, std::size_t c,
                                        std::uint64_t seed) {
  cited::ModelParams p = cited::init_params(d0, h, c, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> gauss(0.0, 0.3);
  for (double& b : p.b1.values()) b = gauss(rng);
  for (double& b : p.b2.values()) b = gauss(rng);
  for (double& b : p.bc.values()) b = gauss(rng);
  return p;
}

/// The fixed acceptance instance: 3 x 60 SBM, h = 16, master seed 42.
inline cited::ExperimentConfig acceptance_config(std::uint64_t master_seed = 42) {
  cited::ExperimentConfig cfg;
  cfg.master_seed = master_seed;
  cfg.workers = 1;
  return cfg;
}

struct Instance {
  cited::ExperimentConfig cfg;
  cited::Dataset ds;
  cited::SparseMatrix adj;
  cited::TargetBundle target;
};

inline const Instance& acceptance_instance() {
  static const Instance inst = [] {
    Instance i;
    i.cfg = acceptance_config();
    i.ds = cited::make_dataset(i.cfg);
    i.adj = cited::normalized_adjacency(i.ds.graph);
    i.target = cited::train_target(i.ds, i.adj, i.cfg);
    return i;
  }();
  return inst;
}

}  // namespace fixtures
