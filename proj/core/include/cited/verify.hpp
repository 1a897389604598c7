#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cited/matrix.hpp"
#include "cited/model.hpp"
#include "cited/signature.hpp"

namespace cited {

enum class OutputLevel { embedding, label };

std::string_view to_string(OutputLevel level);
OutputLevel output_level_from_string(std::string_view s);

struct MatchScore {
  std::string model_id;
  Provenance provenance = Provenance::surrogate;
  OutputLevel level = OutputLevel::embedding;
  double value = 0.0;       // W2 distance (embedding) or agreement (label)
  double normalized = 0.0;  // filled by normalize_scores
};

/// W2 between the suspect's embeddings on the signature nodes (one row per
/// signature index, same order) and the frozen references. Lower is closer.
/// Throws DimMismatch when widths differ.
MatchScore match_embedding(std::string model_id, Provenance provenance,
                           const Matrix& suspect_embeddings, const SignatureSet& sig);

/// Fraction of signature nodes where the suspect predicts the reference
/// label. Higher is closer.
MatchScore match_label(std::string model_id, Provenance provenance,
                       std::span<const int> suspect_labels, const SignatureSet& sig);

/// Min-max over the whole pool; a constant pool maps to 0.5.
void normalize_scores(std::vector<MatchScore>& scores);

struct RUCurve {
  std::vector<double> thresholds;  // t/r for t = 1..r
  std::vector<double> robustness;
  std::vector<double> uniqueness;
};

/// Embedding level: R = frac(pos < tau), U = frac(neg >= tau).
/// Label level:     R = frac(pos > tau), U = frac(neg <= tau).
RUCurve ru_curves(std::span<const double> pos, std::span<const double> neg, OutputLevel level,
                  std::size_t r = 100);

/// Mean over thresholds of min(R, U).
double aruc(const RUCurve& curve);

/// Mann-Whitney AUC with half credit for ties. The score is the negated
/// distance at the embedding level and the agreement at the label level.
double auc(std::span<const double> pos, std::span<const double> neg, OutputLevel level);

struct VerificationReport {
  OutputLevel level = OutputLevel::embedding;
  std::vector<MatchScore> scores;
  RUCurve curve;
  double aruc = 0.0;
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Normalizes the pooled scores and computes both curves, ARUC and AUC.
/// Surrogates are positives, independents negatives.
VerificationReport summarize(OutputLevel level, std::vector<MatchScore> scores,
                             std::size_t r = 100);

}  // namespace cited
