#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cited/graph.hpp"
#include "cited/model.hpp"
#include "cited/optim.hpp"
#include "cited/verify.hpp"

namespace cited {

struct QueryConfig {
  std::size_t total = 72;
  double boundary_fraction = 0.20;
  std::uint64_t seed = 0;

  void validate() const;
};

/// round(boundary_fraction * total) nodes of `universe` with the smallest
/// top-1/top-2 softmax gap, plus uniformly drawn nodes from the rest of the
/// universe. Returned sorted.
std::vector<NodeId> build_query_set(const Matrix& target_logits, std::span<const NodeId> universe,
                                    const QueryConfig& cfg);
/// Universe = every node.
std::vector<NodeId> build_query_set(const Matrix& target_logits, const QueryConfig& cfg);

/// What the attacker observes: the target's outputs on the queried nodes only.
struct QueryResponses {
  std::vector<NodeId> nodes;
  Matrix embeddings;  // |nodes| x h
  Matrix logits;      // |nodes| x c
};

/// Defender side: run the deployed model on `features` and release the rows
/// for `nodes`.
QueryResponses answer_queries(const ModelParams& target, const SparseMatrix& adj,
                              const Matrix& features, std::span<const NodeId> nodes);

/// The graph as the attacker sees it: structure and features, no labels.
struct AttackSurface {
  const SparseMatrix& adjacency;
  const Matrix& features;
};

/// Regresses the surrogate's embeddings onto the released ones (mean squared
/// error), then fits the classifier head for `head_epochs` on the released
/// argmax labels with the propagation layers frozen. Throws DimMismatch when
/// `hidden` differs from the released embedding width.
ModelParams extract_embedding_level(const QueryResponses& responses, const AttackSurface& surface,
                                    std::size_t hidden, const TrainConfig& cfg,
                                    std::size_t head_epochs = 50);

/// Knowledge distillation: T^2 * mean KL(softmax(Zt/T) || softmax(Zs/T)).
ModelParams extract_label_level(const QueryResponses& responses, const AttackSurface& surface,
                                std::size_t hidden, const TrainConfig& cfg,
                                double temperature = 1.0);

/// Distillation loss value for given teacher/student logits.
double distillation_loss(const Matrix& teacher, const Matrix& student, double temperature);

/// Supervised model trained on the defender's task without querying the
/// target.
ModelParams train_independent(const Graph& g, const SparseMatrix& adj, const Splits& splits,
                              std::size_t hidden, const TrainConfig& cfg, std::uint64_t seed);

/// X' = X + N(0, sigma^2) on the listed rows only.
Matrix shift_queries(const Matrix& X, std::span<const NodeId> rows, double sigma,
                     std::uint64_t seed);

enum class RemovalKind { none, prune30, finetune };
std::string_view to_string(RemovalKind kind);
RemovalKind removal_from_string(std::string_view s);

/// prune30 zeroes 30% of the weights; finetune runs 50 epochs on
/// `unseen_nodes` using the surrogate's own predictions as labels.
ModelParams apply_removal(const ModelParams& surrogate, RemovalKind kind,
                          const AttackSurface& surface, std::span<const NodeId> unseen_nodes,
                          std::uint64_t seed, double dropout = 0.5);

struct PoolConfig {
  OutputLevel level = OutputLevel::embedding;
  std::size_t surrogates = 5;
  std::size_t independents = 5;
  std::size_t query_total = 72;
  double boundary_fraction = 0.20;
  double temperature = 1.0;
  double shift_sigma = 0.0;
  RemovalKind removal = RemovalKind::none;
  TrainConfig train;
  std::size_t surrogate_hidden = 0;  // 0: target width
  std::vector<std::size_t> independent_hidden{16, 24, 32};
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct PoolMember {
  std::string id;
  ModelParams params;
  std::uint64_t seed = 0;
  OutputLevel level = OutputLevel::embedding;
  RemovalKind removal = RemovalKind::none;
  std::vector<NodeId> queries;  // empty for independents
};

struct ModelPool {
  std::vector<PoolMember> surrogates;
  std::vector<PoolMember> independents;
};

/// Nodes an attacker may query: everything outside the defender's train split.
std::vector<NodeId> attacker_universe(std::size_t n, const Splits& splits);

/// Surrogates extracted from `target`. Only the target's outputs on each
/// surrogate's query set are visible to the extraction routines.
std::vector<PoolMember> build_surrogates(const ModelParams& target, const SparseMatrix& adj,
                                         const Matrix& features,
                                         std::span<const NodeId> universe,
                                         const PoolConfig& cfg);

/// Widths cycle through cfg.independent_hidden unless `required_width` is
/// nonzero. Embedding matching needs every suspect at the target's width.
std::vector<PoolMember> build_independents(const Graph& g, const SparseMatrix& adj,
                                           const Splits& splits, const PoolConfig& cfg,
                                           std::size_t required_width = 0);

ModelPool build_pool(const Graph& g, const SparseMatrix& adj, const Splits& splits,
                     const ModelParams& target, const PoolConfig& cfg);

}  // namespace cited
