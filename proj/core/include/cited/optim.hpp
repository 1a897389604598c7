#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cited/graph.hpp"
#include "cited/model.hpp"

namespace cited {

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 1e-5;
  std::size_t epochs = 200;
  double dropout = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which of the six parameter tensors an optimizer step updates.
using TensorSelection = std::array<bool, ModelParams::kTensorCount>;
inline constexpr TensorSelection kAllTensors{true, true, true, true, true, true};
inline constexpr TensorSelection kClassifierOnly{false, false, false, false, true, true};

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::array<Matrix, ModelParams::kTensorCount> m;
  std::array<Matrix, ModelParams::kTensorCount> v;

  static AdamState zeros_for(const ModelParams& p);
};

/// One Adam step at (1-based) step count t. L2 weight decay is added to the
/// gradient of weight matrices only.
void adam_step(AdamState& state, ModelParams& p, const ModelParams& grads, double lr,
               double weight_decay, std::size_t t, const TensorSelection& update = kAllTensors);

/// Loss value plus dL/dZ and an optional dL/dH contribution (empty matrix
/// when unused), evaluated on a training-mode forward pass.
struct ObjectiveValue {
  double loss = 0.0;
  Matrix dZ;
  Matrix dH;
};
using Objective = std::function<ObjectiveValue(const ForwardCache&)>;
using EpochHook = std::function<void(std::size_t epoch, double loss, const ModelParams&)>;

/// Full-batch Adam loop shared by target training, fine-tuning and the
/// attack simulations. Returns the per-epoch training loss.
std::vector<double> fit(ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                        const TrainConfig& cfg, const Objective& objective,
                        const TensorSelection& update = kAllTensors,
                        const EpochHook& hook = nullptr);

/// Cross-entropy objective over `nodes` against `labels`.
Objective cross_entropy_objective(std::span<const int> labels, std::span<const NodeId> nodes);

struct EpochRecord {
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
};

/// Trains from init_params(d0, h, c, cfg.seed) on splits.train; returns the
/// final-epoch parameters.
TrainResult train(const Graph& g, const SparseMatrix& adj, const Splits& splits,
                  std::size_t hidden, const TrainConfig& cfg);

/// Warm-started training with a fresh optimizer state.
TrainResult finetune(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                     std::span<const int> labels, std::span<const NodeId> train_nodes,
                     std::span<const NodeId> val_nodes, const TrainConfig& cfg);

/// Fine-tuning defaults: 50 epochs, lr 1e-3, weight decay 1e-5.
TrainConfig finetune_defaults(std::uint64_t seed, double dropout = 0.5);

}  // namespace cited
