#pragma once

#include <array>
#include <cstdint>

#include "cited/model.hpp"

namespace cited {

/// Zeroes round(fraction * #weights) weight entries with the smallest
/// magnitude across W1, W2, Wc jointly. Biases are untouched; ties go to the
/// earlier entry in parameter order.
ModelParams prune_weights(const ModelParams& p, double fraction = 0.30);

struct PerturbedModel {
  ModelParams params;
  /// rho_i = eta * ||W_i||_2 for W1, W2, Wc.
  std::array<double, 3> rho{};
  /// ||W_i||_2 of the unperturbed weights.
  std::array<double, 3> weight_norms{};
};

/// Adds to each weight matrix an independent Gaussian matrix rescaled to
/// spectral norm eta * ||W_i||_2. Biases are not perturbed. Throws
/// DegenerateWeight when a weight matrix has zero spectral norm.
PerturbedModel perturb_params(const ModelParams& p, double eta, std::uint64_t seed);

/// Spectral-norm settings used wherever a norm must be tight (perturbation
/// scaling and the bound checks).
inline constexpr std::size_t kPreciseNormIters = 2000;
inline constexpr double kPreciseNormTol = 1e-15;

}  // namespace cited
