#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cited/graph.hpp"
#include "cited/matrix.hpp"
#include "cited/model.hpp"

namespace cited {

/// How the logit-gap term of the boundary score is computed.
enum class MarginVariant {
  /// ReLU(z_top1 - z_top2): the nonnegative gap between the two largest logits.
  top_gap,
  /// ReLU(z_top2 - z_top1): the printed ordering, identically zero.
  literal,
};

std::string_view to_string(MarginVariant v);
MarginVariant margin_variant_from_string(std::string_view s);

struct BoundaryConfig {
  double lambda = 1.0;
  double boundary_ratio = 0.10;
  double signature_ratio = 0.20;
  // Relative weights of margin / thickness / heterogeneity. The aggregate is
  // m + alpha1 * t - alpha2 * h with alpha1 = w_thickness / w_margin and
  // alpha2 = w_hetero / w_margin.
  double w_margin = 0.1;
  double w_thickness = 0.8;
  double w_hetero = 0.1;
  double gamma = 0.1;
  MarginVariant margin_variant = MarginVariant::top_gap;

  double alpha1() const noexcept { return w_thickness / w_margin; }
  double alpha2() const noexcept { return w_hetero / w_margin; }
  void validate() const;
};

struct SignatureSet {
  std::vector<NodeId> indices;  // strictly increasing
  Matrix ref_embeddings;        // |indices| x h, target embeddings
  std::vector<int> ref_labels;  // target predictions
  std::uint64_t commitment = 0;

  std::size_t size() const noexcept { return indices.size(); }
  void validate() const;
};

/// s(v) = ReLU(gap) - lambda * H(softmax(Z_v)) with natural-log entropy.
std::vector<double> boundary_scores(const Matrix& Z, double lambda,
                                    MarginVariant variant = MarginVariant::top_gap);

/// The ceil(m * n) lowest-scoring nodes, ties to the lower index; sorted.
std::vector<NodeId> select_boundary(std::span<const double> scores, double m);

double margin_score(const Matrix& H, NodeId i, NodeId j);
double thickness_score(const Matrix& Z, NodeId i, NodeId j, double gamma);
/// Fraction of neighbors whose predicted label differs; 0 for isolated nodes.
double hetero_score(const Graph& g, std::span<const int> pred_labels, NodeId i);

struct CandidateScores {
  std::vector<NodeId> candidates;  // V \ boundary, ascending
  std::vector<double> margin;      // normalized components
  std::vector<double> thickness;
  std::vector<double> hetero;
  std::vector<double> score;       // aggregate
};

/// Aggregate score for every non-boundary node. Components are min-max
/// normalized over candidates (constant components map to 0); candidates
/// whose predicted class has no boundary node get margin = thickness = 1.
/// Throws EmptyBoundary.
CandidateScores signature_scores(const Matrix& H, const Matrix& Z, const Graph& g,
                                 std::span<const int> pred_labels,
                                 std::span<const NodeId> boundary, const BoundaryConfig& cfg);

/// Lower inclusive empirical quantile: the ceil(q * N)-th smallest value.
/// Returns -inf when that rank is zero.
double lower_quantile(std::span<const double> values, double q);

/// Boundary nodes plus the candidates with aggregate score <= the
/// signature_ratio quantile, with reference outputs frozen from `outputs`.
SignatureSet build_signature(const ForwardOutputs& outputs, const Graph& g,
                             const BoundaryConfig& cfg);

/// Rebuilds reference outputs for an existing index set (e.g. after the
/// owner fine-tunes the deployed model).
SignatureSet freeze_signature(std::vector<NodeId> indices, const ForwardOutputs& outputs);

/// Clusters the reference embeddings into ceil(keep_ratio * |sig|) groups
/// and keeps the member nearest to each centroid.
SignatureSet group_compress(const SignatureSet& sig, double keep_ratio, std::uint64_t seed);

/// FNV-1a 64 over each index as 4 little-endian bytes. Throws
/// UnsortedIndices when the list is not ascending.
std::uint64_t commit(std::span<const NodeId> indices);
/// False for a mismatching digest or an unsorted list.
bool verify_commit(std::span<const NodeId> indices, std::uint64_t digest);

}  // namespace cited
