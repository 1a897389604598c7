#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "cited/graph.hpp"
#include "cited/matrix.hpp"

namespace cited {

enum class Provenance { target, surrogate, independent };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Two propagation layers followed by a linear classifier:
///   H = ReLU(A * Dropout(ReLU(A X W1 + b1)) W2 + b2),  Z = H Wc + bc.
struct ModelParams {
  Matrix W1, b1;  // d0 x h, 1 x h
  Matrix W2, b2;  // h x h, 1 x h
  Matrix Wc, bc;  // h x c, 1 x c
  std::uint64_t seed = 0;
  Provenance provenance = Provenance::target;

  std::size_t input_dim() const noexcept { return W1.rows(); }
  std::size_t hidden_dim() const noexcept { return W1.cols(); }
  std::size_t num_classes() const noexcept { return Wc.cols(); }

  static constexpr std::size_t kTensorCount = 6;
  /// Fixed parameter order W1, b1, W2, b2, Wc, bc.
  std::array<Matrix*, kTensorCount> tensors() noexcept { return {&W1, &b1, &W2, &b2, &Wc, &bc}; }
  std::array<const Matrix*, kTensorCount> tensors() const noexcept {
    return {&W1, &b1, &W2, &b2, &Wc, &bc};
  }
  static constexpr std::array<bool, kTensorCount> kIsWeight{true, false, true, false, true, false};

  /// Zero-valued parameters of the same shape.
  ModelParams zeros_like() const;
  void validate() const;
};

/// Glorot-uniform weights, zero biases.
ModelParams init_params(std::size_t d0, std::size_t h, std::size_t c, std::uint64_t seed);

struct ForwardOutputs {
  Matrix H;  // n x h, output of the second propagation layer
  Matrix Z;  // n x c logits
};

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
  Matrix AX;   // A X
  Matrix pre1; // A X W1 + b1
  Matrix hid1; // dropout(ReLU(pre1))
  Matrix AH1;  // A hid1
  Matrix pre2; // A hid1 W2 + b2
  Matrix H;
  Matrix Z;
};

/// Per-entry multipliers for the first hidden layer: 0 for dropped units,
/// 1/(1-p) for kept ones.
using DropoutMask = Matrix;

DropoutMask sample_dropout_mask(std::size_t rows, std::size_t cols, double dropout,
                                std::mt19937_64& rng);

ForwardCache forward_cached(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                            const DropoutMask* mask = nullptr);
ForwardOutputs forward(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                       const DropoutMask* mask = nullptr);

/// Gradients of a scalar loss given dL/dZ and, optionally, an extra dL/dH
/// term. `mask` must be the one used to produce `cache`.
ModelParams backward(const ModelParams& p, const SparseMatrix& adj, const ForwardCache& cache,
                     const Matrix& dZ, const Matrix* dH = nullptr,
                     const DropoutMask* mask = nullptr);

struct LossAndGrads {
  double loss = 0.0;
  ModelParams grads;
};

/// Mean cross-entropy over `nodes` with a fixed dropout mask (or none).
LossAndGrads cross_entropy_loss_and_grads(const ModelParams& p, const SparseMatrix& adj,
                                          const Matrix& X, std::span<const int> labels,
                                          std::span<const NodeId> nodes,
                                          const DropoutMask* mask = nullptr);

/// Samples a dropout mask from `rng` (when dropout > 0) and returns the
/// cross-entropy loss and exact gradients under that mask.
LossAndGrads loss_and_grads(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                            std::span<const int> labels, std::span<const NodeId> nodes,
                            double dropout, std::mt19937_64& rng);

double accuracy(const Matrix& logits, std::span<const int> labels, std::span<const NodeId> nodes);

}  // namespace cited
