#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "cited/bounds.hpp"
#include "cited/extraction.hpp"
#include "cited/graph.hpp"
#include "cited/io.hpp"
#include "cited/optim.hpp"
#include "cited/signature.hpp"
#include "cited/verify.hpp"

namespace cited {

struct ModelSettings {
  std::size_t hidden = 16;
  TrainConfig train;
  std::size_t restarts = 3;  // best validation accuracy wins
  std::size_t finetune_epochs = 50;
};

struct AttackSettings {
  std::vector<OutputLevel> levels{OutputLevel::embedding, OutputLevel::label};
  std::size_t surrogates = 5;
  std::size_t independents = 5;
  std::size_t query_total = 72;
  double boundary_fraction = 0.20;
  RemovalKind removal = RemovalKind::none;
  double temperature = 1.0;
  double shift_sigma = 0.0;
  std::size_t surrogate_hidden = 0;
  std::vector<std::size_t> independent_hidden{16, 24, 32};
};

struct VerifySettings {
  std::size_t r = 100;
  bool use_sinkhorn = false;
  double sinkhorn_eps = 0.05;
  std::size_t sinkhorn_iters = 500;
};

struct BoundsSettings {
  std::optional<double> eta;  // unset: 1/(2L) for each check
  std::size_t trials = 200;
  std::size_t grid_points = 9;
};

struct ExperimentConfig {
  std::optional<fs::path> dataset_path;
  SbmConfig sbm;  // seed is derived from master_seed
  ModelSettings model;
  BoundaryConfig signature;
  AttackSettings attack;
  VerifySettings verify;
  BoundsSettings bounds;
  fs::path output_dir = "out";
  std::uint64_t master_seed = 42;
  std::size_t workers = 0;  // 0: available parallelism

  /// Throws ConfigInvalid with the offending field path.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigInvalid naming the
/// field path. Relative dataset paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir = {});
/// Throws MissingArtifact when the file is absent.
ExperimentConfig load_config(const fs::path& path);

/// Per-stage seed: FNV-1a 64 over (master as 8 LE bytes || tag).
std::uint64_t stage_seed(const ExperimentConfig& cfg, std::string_view tag);

// In-memory stages.

Dataset make_dataset(const ExperimentConfig& cfg);

struct TargetBundle {
  ModelParams pretrained;
  ModelParams deployed;  // after the 50-epoch fine-tune
  SignatureSet signature;  // references frozen from `deployed`
  std::vector<double> restart_val_accuracy;
  std::size_t chosen_restart = 0;
  double val_accuracy_pretrained = 0.0;
  double val_accuracy_deployed = 0.0;
  double train_accuracy_pretrained = 0.0;
  double train_accuracy_deployed = 0.0;
};

TargetBundle train_target(const Dataset& ds, const SparseMatrix& adj, const ExperimentConfig& cfg);

PoolConfig pool_config(const ExperimentConfig& cfg, OutputLevel level);
ModelPool attack_target(const Dataset& ds, const SparseMatrix& adj, const ModelParams& target,
                        const ExperimentConfig& cfg, OutputLevel level);

/// Scores every pool member against `sig` on the clean graph.
VerificationReport evaluate(const Dataset& ds, const SparseMatrix& adj, const SignatureSet& sig,
                            const ModelPool& pool, OutputLevel level, const VerifySettings& vs,
                            std::size_t workers = 1);

/// Uniformly drawn node set of the given size, references frozen from
/// `outputs`.
SignatureSet random_signature(const ForwardOutputs& outputs, std::size_t size, std::uint64_t seed);

struct BoundsBundle {
  BoundReport lemma;      // embeddings, two weight layers
  BoundReport agreement;  // logits, three weight layers
};

BoundsBundle check_bounds(const Dataset& ds, const SparseMatrix& adj, const ModelParams& target,
                          const ExperimentConfig& cfg);

/// Agreement passes when the empirical rate is at least the bound minus one
/// trial's worth of slack.
bool agreement_holds(const BoundReport& r);

// File-backed commands. Each writes into cfg.output_dir and records its
// outputs and seeds in manifest.json.

void cmd_gen_data(const ExperimentConfig& cfg);
void cmd_train_target(const ExperimentConfig& cfg);
void cmd_attack(const ExperimentConfig& cfg);
void cmd_verify(const ExperimentConfig& cfg);
/// Throws InvariantViolation after writing its outputs when a bound fails.
void cmd_bounds(const ExperimentConfig& cfg);
void cmd_pipeline(const ExperimentConfig& cfg);

}  // namespace cited
