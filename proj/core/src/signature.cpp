#include "cited/signature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cited/error.hpp"
#include "cited/hash.hpp"
#include "cited/kmeans.hpp"

namespace cited {

std::string_view to_string(MarginVariant v) {
  return v == MarginVariant::top_gap ? "top_gap" : "literal";
}

MarginVariant margin_variant_from_string(std::string_view s) {
  if (s == "top_gap") return MarginVariant::top_gap;
  if (s == "literal") return MarginVariant::literal;
  fail(ErrorCode::ParseError, "unknown margin variant '" + std::string(s) + "'");
}

void BoundaryConfig::validate() const {
  require(lambda >= 0.0, ErrorCode::ConfigInvalid, "signature: lambda must be >= 0");
  require(boundary_ratio > 0.0 && boundary_ratio <= 1.0, ErrorCode::ConfigInvalid,
          "signature: boundary_ratio must be in (0,1]");
  require(signature_ratio >= 0.0 && signature_ratio <= 1.0, ErrorCode::ConfigInvalid,
          "signature: signature_ratio must be in [0,1]");
  require(w_margin > 0.0 && w_thickness >= 0.0 && w_hetero >= 0.0, ErrorCode::ConfigInvalid,
          "signature: weights must be nonnegative with w_margin > 0");
}

void SignatureSet::validate() const {
  for (std::size_t i = 1; i < indices.size(); ++i)
    require(indices[i - 1] < indices[i], ErrorCode::InvariantViolation,
            "signature indices must be strictly increasing");
  require(ref_embeddings.rows() == indices.size() && ref_labels.size() == indices.size(),
          ErrorCode::InvariantViolation, "reference outputs must have one row per index");
  require(commitment == commit(indices), ErrorCode::InvariantViolation,
          "commitment does not match the index set");
}

namespace {

struct TopTwo {
  std::size_t first = 0;
  std::size_t second = 0;
};

TopTwo top_two(std::span<const double> z) {
  TopTwo t;
  t.first = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j == t.first) continue;
    if (z[j] > best) {
      best = z[j];
      t.second = j;
    }
  }
  return t;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double thickness_from_probs(std::span<const double> ti, std::span<const double> tj, double ci,
                            double cj, double gamma) {
  return std::sqrt(squared_distance(ti, tj)) * sigmoid(gamma - (ci - cj));
}

double confidence(std::span<const double> probs) {
  return *std::max_element(probs.begin(), probs.end());
}

// Min-max over the entries flagged in `use`; constant ranges map to 0.
void min_max_normalize(std::vector<double>& v, const std::vector<char>& use) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!use[i]) continue;
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  const double span = hi - lo;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!use[i]) continue;
    v[i] = span > 0.0 ? (v[i] - lo) / span : 0.0;
  }
}

}  // namespace

std::vector<double> boundary_scores(const Matrix& Z, double lambda, MarginVariant variant) {
  require(Z.cols() >= 2, ErrorCode::InvalidArgument, "boundary scores need at least 2 classes");
  std::vector<double> scores(Z.rows());
  std::vector<double> prob(Z.cols());
  for (std::size_t v = 0; v < Z.rows(); ++v) {
    auto z = Z.row(v);
    const TopTwo t = top_two(z);
    const double gap = variant == MarginVariant::top_gap ? z[t.first] - z[t.second]
                                                         : z[t.second] - z[t.first];
    softmax_into(z, prob);
    scores[v] = std::max(gap, 0.0) - lambda * entropy(prob);
  }
  return scores;
}

std::vector<NodeId> select_boundary(std::span<const double> scores, double m) {
  require(m > 0.0 && m <= 1.0, ErrorCode::InvalidArgument, "boundary ratio must be in (0,1]");
  const std::size_t n = scores.size();
  const auto count = std::min(
      n, static_cast<std::size_t>(std::ceil(m * static_cast<double>(n) - 1e-9)));
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return scores[a] < scores[b]; });
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

double margin_score(const Matrix& H, NodeId i, NodeId j) {
  return std::sqrt(squared_distance(H.row(i), H.row(j)));
}

double thickness_score(const Matrix& Z, NodeId i, NodeId j, double gamma) {
  std::vector<double> ti(Z.cols()), tj(Z.cols());
  softmax_into(Z.row(i), ti);
  softmax_into(Z.row(j), tj);
  return thickness_from_probs(ti, tj, confidence(ti), confidence(tj), gamma);
}

double hetero_score(const Graph& g, std::span<const int> pred_labels, NodeId i) {
  const auto nb = g.neighbors(i);
  if (nb.empty()) return 0.0;
  std::size_t differ = 0;
  for (NodeId u : nb) differ += pred_labels[u] != pred_labels[i] ? 1 : 0;
  return static_cast<double>(differ) / static_cast<double>(nb.size());
}

CandidateScores signature_scores(const Matrix& H, const Matrix& Z, const Graph& g,
                                 std::span<const int> pred_labels,
                                 std::span<const NodeId> boundary, const BoundaryConfig& cfg) {
  require(!boundary.empty(), ErrorCode::EmptyBoundary, "boundary set is empty");
  const std::size_t n = H.rows();
  require(Z.rows() == n && pred_labels.size() == n && g.num_nodes() == n,
          ErrorCode::ShapeMismatch, "embeddings, logits, labels and graph disagree on n");

  const Matrix probs = softmax_rows(Z);
  std::vector<double> conf(n);
  for (std::size_t v = 0; v < n; ++v) conf[v] = confidence(probs.row(v));

  std::vector<char> in_boundary(n, 0);
  for (NodeId b : boundary) in_boundary[b] = 1;

  // Boundary nodes grouped by predicted class.
  const std::size_t c = Z.cols();
  std::vector<std::vector<NodeId>> by_class(c);
  for (NodeId b : boundary) by_class[static_cast<std::size_t>(pred_labels[b])].push_back(b);

  CandidateScores out;
  for (NodeId v = 0; v < n; ++v)
    if (!in_boundary[v]) out.candidates.push_back(v);
  const std::size_t m = out.candidates.size();
  out.margin.assign(m, 1.0);
  out.thickness.assign(m, 1.0);
  out.hetero.assign(m, 0.0);
  std::vector<char> matched(m, 0);

  for (std::size_t k = 0; k < m; ++k) {
    const NodeId i = out.candidates[k];
    const auto& peers = by_class[static_cast<std::size_t>(pred_labels[i])];
    if (!peers.empty()) {
      double best_margin = std::numeric_limits<double>::infinity();
      double best_thick = std::numeric_limits<double>::infinity();
      for (NodeId j : peers) {
        best_margin = std::min(best_margin, squared_distance(H.row(i), H.row(j)));
        best_thick = std::min(best_thick, thickness_from_probs(probs.row(i), probs.row(j),
                                                               conf[i], conf[j], cfg.gamma));
      }
      out.margin[k] = std::sqrt(best_margin);
      out.thickness[k] = best_thick;
      matched[k] = 1;
    }
    out.hetero[k] = hetero_score(g, pred_labels, i);
  }

  min_max_normalize(out.margin, matched);
  min_max_normalize(out.thickness, matched);
  min_max_normalize(out.hetero, std::vector<char>(m, 1));

  const double a1 = cfg.alpha1();
  const double a2 = cfg.alpha2();
  out.score.resize(m);
  for (std::size_t k = 0; k < m; ++k)
    out.score[k] = out.margin[k] + a1 * out.thickness[k] - a2 * out.hetero[k];
  return out;
}

double lower_quantile(std::span<const double> values, double q) {
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(values.size()) - 1e-9));
  if (rank == 0 || values.empty()) return -std::numeric_limits<double>::infinity();
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[std::min(rank, sorted.size()) - 1];
}

SignatureSet freeze_signature(std::vector<NodeId> indices, const ForwardOutputs& outputs) {
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  SignatureSet sig;
  sig.ref_embeddings = select_rows(outputs.H, indices);
  const auto pred = argmax_rows(outputs.Z);
  sig.ref_labels.reserve(indices.size());
  for (NodeId v : indices) sig.ref_labels.push_back(pred[v]);
  sig.commitment = commit(indices);
  sig.indices = std::move(indices);
  return sig;
}

SignatureSet build_signature(const ForwardOutputs& outputs, const Graph& g,
                             const BoundaryConfig& cfg) {
  cfg.validate();
  const auto scores = boundary_scores(outputs.Z, cfg.lambda, cfg.margin_variant);
  std::vector<NodeId> indices = select_boundary(scores, cfg.boundary_ratio);
  const auto pred = argmax_rows(outputs.Z);
  if (indices.size() < g.num_nodes()) {
    const CandidateScores cs = signature_scores(outputs.H, outputs.Z, g, pred, indices, cfg);
    const double tau = lower_quantile(cs.score, cfg.signature_ratio);
    for (std::size_t k = 0; k < cs.candidates.size(); ++k)
      if (cs.score[k] <= tau) indices.push_back(cs.candidates[k]);
  }
  return freeze_signature(std::move(indices), outputs);
}

SignatureSet group_compress(const SignatureSet& sig, double keep_ratio, std::uint64_t seed) {
  require(keep_ratio > 0.0 && keep_ratio <= 1.0, ErrorCode::InvalidArgument,
          "keep_ratio must be in (0,1]");
  if (sig.size() == 0) return sig;
  const auto k = std::min(sig.size(), static_cast<std::size_t>(std::ceil(
                                          keep_ratio * static_cast<double>(sig.size()) - 1e-9)));
  if (k >= sig.size()) return sig;
  const KMeansResult km = kmeans(sig.ref_embeddings, std::max<std::size_t>(k, 1), seed);

  std::vector<std::size_t> best(km.centroids.rows(), sig.size());
  std::vector<double> best_d(km.centroids.rows(), std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < sig.size(); ++r) {
    const std::size_t c = km.assignment[r];
    const double d = squared_distance(sig.ref_embeddings.row(r), km.centroids.row(c));
    if (d < best_d[c]) {
      best_d[c] = d;
      best[c] = r;
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t r : best)
    if (r < sig.size()) keep.push_back(r);
  std::sort(keep.begin(), keep.end());

  SignatureSet out;
  out.ref_embeddings = Matrix(keep.size(), sig.ref_embeddings.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.indices.push_back(sig.indices[keep[i]]);
    out.ref_labels.push_back(sig.ref_labels[keep[i]]);
    std::copy_n(sig.ref_embeddings.row(keep[i]).begin(), sig.ref_embeddings.cols(),
                out.ref_embeddings.row(i).begin());
  }
  out.commitment = commit(out.indices);
  return out;
}

std::uint64_t commit(std::span<const NodeId> indices) {
  Fnv1a64 h;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(i == 0 || indices[i - 1] <= indices[i], ErrorCode::UnsortedIndices,
            "commitment input must be sorted ascending");
    h.update_u32_le(indices[i]);
  }
  return h.digest();
}

bool verify_commit(std::span<const NodeId> indices, std::uint64_t digest) {
  if (!std::is_sorted(indices.begin(), indices.end())) return false;
  return commit(indices) == digest;
}

}  // namespace cited
