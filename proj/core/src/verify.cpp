#include "cited/verify.hpp"

#include <algorithm>
#include <limits>

#include "cited/error.hpp"
#include "cited/transport.hpp"

namespace cited {

std::string_view to_string(OutputLevel level) {
  return level == OutputLevel::embedding ? "emb" : "label";
}

OutputLevel output_level_from_string(std::string_view s) {
  if (s == "emb" || s == "embedding") return OutputLevel::embedding;
  if (s == "label") return OutputLevel::label;
  fail(ErrorCode::ParseError, "unknown output level '" + std::string(s) + "'");
}

MatchScore match_embedding(std::string model_id, Provenance provenance,
                           const Matrix& suspect_embeddings, const SignatureSet& sig) {
  require(suspect_embeddings.cols() == sig.ref_embeddings.cols(), ErrorCode::DimMismatch,
          "suspect embedding width differs from the reference width");
  require(suspect_embeddings.rows() == sig.ref_embeddings.rows(), ErrorCode::SizeMismatch,
          "suspect must supply one embedding per signature node");
  MatchScore s;
  s.model_id = std::move(model_id);
  s.provenance = provenance;
  s.level = OutputLevel::embedding;
  s.value = w2_exact(suspect_embeddings, sig.ref_embeddings);
  return s;
}

MatchScore match_label(std::string model_id, Provenance provenance,
                       std::span<const int> suspect_labels, const SignatureSet& sig) {
  require(suspect_labels.size() == sig.ref_labels.size(), ErrorCode::SizeMismatch,
          "suspect must supply one label per signature node");
  MatchScore s;
  s.model_id = std::move(model_id);
  s.provenance = provenance;
  s.level = OutputLevel::label;
  std::size_t same = 0;
  for (std::size_t i = 0; i < suspect_labels.size(); ++i)
    same += suspect_labels[i] == sig.ref_labels[i] ? 1 : 0;
  s.value = sig.ref_labels.empty()
                ? 0.0
                : static_cast<double>(same) / static_cast<double>(sig.ref_labels.size());
  return s;
}

void normalize_scores(std::vector<MatchScore>& scores) {
  if (scores.empty()) return;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : scores) {
    lo = std::min(lo, s.value);
    hi = std::max(hi, s.value);
  }
  for (auto& s : scores) s.normalized = hi > lo ? (s.value - lo) / (hi - lo) : 0.5;
}

RUCurve ru_curves(std::span<const double> pos, std::span<const double> neg, OutputLevel level,
                  std::size_t r) {
  require(r >= 1, ErrorCode::InvalidArgument, "threshold count must be >= 1");
  require(!pos.empty() && !neg.empty(), ErrorCode::InvalidArgument,
          "robustness/uniqueness curves need surrogates and independents");
  RUCurve curve;
  curve.thresholds.reserve(r);
  for (std::size_t t = 1; t <= r; ++t) {
    const double tau = static_cast<double>(t) / static_cast<double>(r);
    std::size_t rob = 0;
    std::size_t uni = 0;
    if (level == OutputLevel::embedding) {
      for (double x : pos) rob += x < tau ? 1 : 0;
      for (double x : neg) uni += x >= tau ? 1 : 0;
    } else {
      for (double x : pos) rob += x > tau ? 1 : 0;
      for (double x : neg) uni += x <= tau ? 1 : 0;
    }
    curve.thresholds.push_back(tau);
    curve.robustness.push_back(static_cast<double>(rob) / static_cast<double>(pos.size()));
    curve.uniqueness.push_back(static_cast<double>(uni) / static_cast<double>(neg.size()));
  }
  return curve;
}

double aruc(const RUCurve& curve) {
  require(curve.robustness.size() == curve.uniqueness.size() && !curve.robustness.empty(),
          ErrorCode::InvalidArgument, "malformed robustness/uniqueness curve");
  double acc = 0.0;
  for (std::size_t t = 0; t < curve.robustness.size(); ++t)
    acc += std::min(curve.robustness[t], curve.uniqueness[t]);
  return acc / static_cast<double>(curve.robustness.size());
}

double auc(std::span<const double> pos, std::span<const double> neg, OutputLevel level) {
  require(!pos.empty() && !neg.empty(), ErrorCode::InvalidArgument,
          "AUC needs at least one positive and one negative");
  const double sign = level == OutputLevel::embedding ? -1.0 : 1.0;
  double acc = 0.0;
  for (double p : pos) {
    for (double q : neg) {
      const double sp = sign * p;
      const double sq = sign * q;
      if (sp > sq) acc += 1.0;
      else if (sp == sq) acc += 0.5;
    }
  }
  return acc / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

VerificationReport summarize(OutputLevel level, std::vector<MatchScore> scores, std::size_t r) {
  normalize_scores(scores);
  std::vector<double> pos_raw, neg_raw, pos_norm, neg_norm;
  for (const auto& s : scores) {
    if (s.provenance == Provenance::surrogate) {
      pos_raw.push_back(s.value);
      pos_norm.push_back(s.normalized);
    } else if (s.provenance == Provenance::independent) {
      neg_raw.push_back(s.value);
      neg_norm.push_back(s.normalized);
    }
  }
  VerificationReport rep;
  rep.level = level;
  rep.curve = ru_curves(pos_norm, neg_norm, level, r);
  rep.aruc = aruc(rep.curve);
  rep.auc = auc(pos_raw, neg_raw, level);
  rep.positives = pos_raw.size();
  rep.negatives = neg_raw.size();
  rep.scores = std::move(scores);
  return rep;
}

}  // namespace cited
