#include "cited/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cited/error.hpp"

namespace cited {

std::size_t Graph::max_degree() const noexcept {
  std::size_t best = 0;
  for (std::size_t v = 0; v < n_; ++v) best = std::max(best, offsets_[v + 1] - offsets_[v]);
  return best;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < n_; ++u)
    for (NodeId v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph Graph::with_labels(std::vector<int> labels) const {
  require(labels.size() == n_, ErrorCode::ShapeMismatch, "label count differs from node count");
  Graph g = *this;
  for (int y : labels)
    require(y >= 0 && static_cast<std::size_t>(y) < classes_, ErrorCode::IndexOutOfRange,
            "label outside [0, c)");
  g.labels_ = std::move(labels);
  return g;
}

Graph build_graph(std::size_t n, std::span<const Edge> edges, Matrix features,
                  std::vector<int> labels, std::size_t num_classes) {
  require(features.rows() == n, ErrorCode::ShapeMismatch, "feature rows differ from n");
  require(labels.size() == n, ErrorCode::ShapeMismatch, "label count differs from n");
  for (const auto& [u, v] : edges)
    require(u < n && v < n, ErrorCode::IndexOutOfRange,
            "edge endpoint (" + std::to_string(u) + "," + std::to_string(v) + ") >= n");

  if (num_classes == 0) {
    int top = -1;
    for (int y : labels) top = std::max(top, y);
    num_classes = static_cast<std::size_t>(top + 1);
  }
  for (int y : labels)
    require(y >= 0 && static_cast<std::size_t>(y) < num_classes, ErrorCode::IndexOutOfRange,
            "label outside [0, c)");

  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  Graph g;
  g.n_ = n;
  g.classes_ = num_classes;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& list = adj[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    g.offsets_[v + 1] = g.offsets_[v] + list.size();
  }
  g.targets_.reserve(g.offsets_[n]);
  for (const auto& list : adj) g.targets_.insert(g.targets_.end(), list.begin(), list.end());
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  return g;
}

void validate_graph(const Graph& g) {
  const auto n = g.num_nodes();
  const auto offsets = g.offsets();
  require(offsets.size() == n + 1 && offsets[0] == 0, ErrorCode::InvariantViolation,
          "offsets must have length n+1 and start at 0");
  for (std::size_t v = 0; v < n; ++v)
    require(offsets[v] <= offsets[v + 1], ErrorCode::InvariantViolation,
            "offsets must be nondecreasing");
  require(offsets[n] == g.targets().size(), ErrorCode::InvariantViolation,
          "offsets[n] must equal the target count");
  for (NodeId v = 0; v < n; ++v) {
    auto nb = g.neighbors(v);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      require(nb[k] < n && nb[k] != v, ErrorCode::InvariantViolation, "bad neighbor id");
      if (k > 0)
        require(nb[k - 1] < nb[k], ErrorCode::InvariantViolation,
                "neighbor lists must be sorted and duplicate-free");
      auto back = g.neighbors(nb[k]);
      require(std::binary_search(back.begin(), back.end(), v), ErrorCode::InvariantViolation,
              "adjacency must be symmetric");
    }
  }
  for (int y : g.labels())
    require(y >= 0 && static_cast<std::size_t>(y) < g.num_classes(),
            ErrorCode::InvariantViolation, "label outside [0, c)");
}

SparseMatrix normalized_adjacency(const Graph& g) {
  const auto n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (NodeId v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));

  SparseMatrix a;
  a.n = n;
  a.offsets.assign(n + 1, 0);
  a.indices.reserve(g.targets().size() + n);
  a.values.reserve(g.targets().size() + n);
  for (NodeId v = 0; v < n; ++v) {
    bool self_done = false;
    for (NodeId u : g.neighbors(v)) {
      if (!self_done && v < u) {
        a.indices.push_back(v);
        a.values.push_back(inv_sqrt[v] * inv_sqrt[v]);
        self_done = true;
      }
      a.indices.push_back(u);
      a.values.push_back(inv_sqrt[v] * inv_sqrt[u]);
    }
    if (!self_done) {
      a.indices.push_back(v);
      a.values.push_back(inv_sqrt[v] * inv_sqrt[v]);
    }
    a.offsets[v + 1] = a.indices.size();
  }
  return a;
}

void validate_splits(const Splits& s, std::size_t n) {
  std::vector<char> seen(n, 0);
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    for (NodeId v : *part) {
      require(v < n, ErrorCode::InvariantViolation, "split index out of range");
      require(!seen[v], ErrorCode::InvariantViolation, "splits are not disjoint");
      seen[v] = 1;
    }
  }
}

void SbmConfig::validate() const {
  require(blocks >= 1 && nodes_per_block >= 1, ErrorCode::ConfigInvalid,
          "sbm: blocks and nodes_per_block must be >= 1");
  require(0.0 <= p_out && p_out <= p_in && p_in <= 1.0, ErrorCode::ConfigInvalid,
          "sbm: require 0 <= p_out <= p_in <= 1");
  require(feat_dim >= 1, ErrorCode::ConfigInvalid, "sbm: feat_dim must be >= 1");
  require(blocks == 1 || feat_dim + 1 >= blocks, ErrorCode::ConfigInvalid,
          "sbm: feat_dim must be >= blocks - 1 to place a regular simplex");
  require(feat_noise_sigma >= 0.0 && class_mean_separation >= 0.0, ErrorCode::ConfigInvalid,
          "sbm: separation and noise must be nonnegative");
}

Matrix simplex_class_means(std::size_t classes, std::size_t dim, double norm) {
  Matrix means(classes, dim);
  if (classes < 2) return means;
  // Centered one-hot vectors expressed in the Helmert basis of the
  // sum-zero subspace: c points in c-1 coordinates, pairwise equidistant.
  for (std::size_t k = 0; k < classes; ++k) {
    std::vector<double> centered(classes, -1.0 / static_cast<double>(classes));
    centered[k] += 1.0;
    std::vector<double> coords(classes - 1, 0.0);
    for (std::size_t j = 1; j < classes; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < j; ++i) dot += centered[i];
      dot -= static_cast<double>(j) * centered[j];
      coords[j - 1] = dot / std::sqrt(static_cast<double>(j * (j + 1)));
    }
    const double len = euclidean_norm(coords);
    for (std::size_t j = 0; j + 1 < classes && j < dim; ++j) means(k, j) = norm * coords[j] / len;
  }
  return means;
}

Dataset sbm_generate(const SbmConfig& cfg) {
  cfg.validate();
  if (cfg.train_per_class > cfg.nodes_per_block)
    fail(ErrorCode::InfeasibleSplit, "class has " + std::to_string(cfg.nodes_per_block) +
                                         " nodes but " + std::to_string(cfg.train_per_class) +
                                         " training nodes were requested");

  const std::size_t n = cfg.blocks * cfg.nodes_per_block;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<int> labels(n);
  for (std::size_t v = 0; v < n; ++v) labels[v] = static_cast<int>(v / cfg.nodes_per_block);

  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? cfg.p_in : cfg.p_out;
      if (unit(rng) < p) edges.emplace_back(u, v);
    }
  }

  const Matrix means = simplex_class_means(cfg.blocks, cfg.feat_dim, cfg.class_mean_separation);
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix features(n, cfg.feat_dim);
  for (std::size_t v = 0; v < n; ++v) {
    auto mu = means.row(static_cast<std::size_t>(labels[v]));
    auto row = features.row(v);
    for (std::size_t j = 0; j < cfg.feat_dim; ++j)
      row[j] = mu[j] + cfg.feat_noise_sigma * noise(rng);
  }

  Splits splits;
  for (std::size_t k = 0; k < cfg.blocks; ++k) {
    std::vector<NodeId> members(cfg.nodes_per_block);
    std::iota(members.begin(), members.end(), static_cast<NodeId>(k * cfg.nodes_per_block));
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n_train = cfg.train_per_class;
    const std::size_t n_val = std::min(cfg.val_per_class, cfg.nodes_per_block - n_train);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i < n_train) splits.train.push_back(members[i]);
      else if (i < n_train + n_val) splits.val.push_back(members[i]);
      else splits.test.push_back(members[i]);
    }
  }
  std::sort(splits.train.begin(), splits.train.end());
  std::sort(splits.val.begin(), splits.val.end());
  std::sort(splits.test.begin(), splits.test.end());

  Dataset ds;
  ds.graph = build_graph(n, edges, std::move(features), std::move(labels), cfg.blocks);
  ds.splits = std::move(splits);
  ds.seed = cfg.seed;
  ds.generator = "sbm";
  return ds;
}

namespace {

std::size_t rounded_count(double ratio, std::size_t total) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
}

}  // namespace

Graph flip_labels(const Graph& g, std::span<const NodeId> train, double ratio,
                  std::uint64_t seed) {
  require(ratio >= 0.0 && ratio <= 1.0, ErrorCode::InvalidArgument, "ratio must be in [0,1]");
  std::vector<int> labels(g.labels().begin(), g.labels().end());
  const std::size_t count = rounded_count(ratio, train.size());
  if (count == 0 || g.num_classes() < 2) return g.with_labels(std::move(labels));

  std::mt19937_64 rng(seed);
  std::vector<NodeId> pool(train.begin(), train.end());
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_int_distribution<int> other(0, static_cast<int>(g.num_classes()) - 2);
  for (std::size_t i = 0; i < count; ++i) {
    const NodeId v = pool[i];
    int y = other(rng);
    if (y >= labels[v]) ++y;
    labels[v] = y;
  }
  return g.with_labels(std::move(labels));
}

Graph imbalance_flip(const Graph& g, double ratio, std::uint64_t seed) {
  require(ratio >= 0.0 && ratio <= 1.0, ErrorCode::InvalidArgument, "ratio must be in [0,1]");
  const std::size_t c = g.num_classes();
  std::vector<std::vector<NodeId>> members(c);
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    members[static_cast<std::size_t>(g.labels()[v])].push_back(v);

  std::size_t majority = 0;
  for (std::size_t k = 1; k < c; ++k)
    if (members[k].size() > members[majority].size()) majority = k;

  std::vector<int> labels(g.labels().begin(), g.labels().end());
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < c; ++k) {
    if (k == majority) continue;
    auto pool = members[k];
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t count = rounded_count(ratio, pool.size());
    for (std::size_t i = 0; i < count; ++i) labels[pool[i]] = static_cast<int>(majority);
  }
  return g.with_labels(std::move(labels));
}

}  // namespace cited
