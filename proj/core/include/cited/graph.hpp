#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cited/matrix.hpp"

namespace cited {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected graph in CSR form with node features and labels.
/// Neighbor lists are sorted, symmetric, duplicate-free and never contain
/// self-loops; normalized_adjacency() adds the self-loops.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t num_classes() const noexcept { return classes_; }
  std::size_t feature_dim() const noexcept { return features_.cols(); }
  std::size_t num_edges() const noexcept { return targets_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const noexcept {
    return {targets_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const noexcept { return offsets_[v + 1] - offsets_[v]; }
  std::size_t max_degree() const noexcept;

  std::span<const std::size_t> offsets() const noexcept { return offsets_; }
  std::span<const NodeId> targets() const noexcept { return targets_; }
  const Matrix& features() const noexcept { return features_; }
  std::span<const int> labels() const noexcept { return labels_; }

  /// Undirected edges with u < v, in CSR order.
  std::vector<Edge> edge_list() const;

  /// Same structure and features with a replacement label vector.
  Graph with_labels(std::vector<int> labels) const;

  friend Graph build_graph(std::size_t n, std::span<const Edge> edges, Matrix features,
                           std::vector<int> labels, std::size_t num_classes);

 private:
  std::size_t n_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> targets_;
  Matrix features_;
  std::vector<int> labels_;
};

/// Symmetrizes and deduplicates `edges`; self-loops are dropped. Throws
/// IndexOutOfRange for bad endpoints or labels, ShapeMismatch when the
/// feature rows or label count differ from n. num_classes = 0 infers
/// max(label) + 1.
Graph build_graph(std::size_t n, std::span<const Edge> edges, Matrix features,
                  std::vector<int> labels, std::size_t num_classes = 0);

/// Checks the four structural invariants; throws InvariantViolation.
void validate_graph(const Graph& g);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const Graph& g);

struct Splits {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

void validate_splits(const Splits& s, std::size_t n);

struct SbmConfig {
  std::size_t blocks = 3;
  std::size_t nodes_per_block = 60;
  double p_in = 0.3;
  double p_out = 0.02;
  std::size_t feat_dim = 16;
  double class_mean_separation = 3.0;
  double feat_noise_sigma = 0.5;
  std::uint64_t seed = 0;
  std::size_t train_per_class = 20;
  std::size_t val_per_class = 10;

  void validate() const;
};

struct Dataset {
  Graph graph;
  Splits splits;
  std::uint64_t seed = 0;
  std::string generator;
};

/// Class means: vertices of a regular simplex with norm class_mean_separation.
Matrix simplex_class_means(std::size_t classes, std::size_t dim, double norm);

/// Stochastic block model with Gaussian class-conditional features.
/// Throws InfeasibleSplit when nodes_per_block < train_per_class.
Dataset sbm_generate(const SbmConfig& cfg);

/// Replaces round(ratio * |train|) training labels with a uniformly drawn
/// different class.
Graph flip_labels(const Graph& g, std::span<const NodeId> train, double ratio,
                  std::uint64_t seed);

/// Moves round(ratio * |class|) nodes of each non-majority class into the
/// majority class (largest class, ties to the lowest index).
Graph imbalance_flip(const Graph& g, double ratio, std::uint64_t seed);

}  // namespace cited
