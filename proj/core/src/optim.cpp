#include "cited/optim.hpp"

#include <cmath>

#include "cited/error.hpp"
#include "cited/hash.hpp"

namespace cited {

void TrainConfig::validate() const {
  require(lr > 0.0, ErrorCode::ConfigInvalid, "train: lr must be > 0");
  require(dropout >= 0.0 && dropout < 1.0, ErrorCode::ConfigInvalid,
          "train: dropout must be in [0,1)");
  require(weight_decay >= 0.0, ErrorCode::ConfigInvalid, "train: weight_decay must be >= 0");
}

AdamState AdamState::zeros_for(const ModelParams& p) {
  AdamState s;
  auto ts = p.tensors();
  for (std::size_t i = 0; i < ModelParams::kTensorCount; ++i) {
    s.m[i] = Matrix(ts[i]->rows(), ts[i]->cols());
    s.v[i] = Matrix(ts[i]->rows(), ts[i]->cols());
  }
  return s;
}

void adam_step(AdamState& state, ModelParams& p, const ModelParams& grads, double lr,
               double weight_decay, std::size_t t, const TensorSelection& update) {
  require(t >= 1, ErrorCode::InvalidArgument, "adam step count must be >= 1");
  const double bias1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(t));
  auto params = p.tensors();
  auto gs = grads.tensors();
  for (std::size_t i = 0; i < ModelParams::kTensorCount; ++i) {
    if (!update[i]) continue;
    auto w = params[i]->values();
    auto g = gs[i]->values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    require(g.size() == w.size(), ErrorCode::ShapeMismatch, "gradient shape differs");
    const double decay = ModelParams::kIsWeight[i] ? weight_decay : 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double gk = g[k] + decay * w[k];
      m[k] = AdamState::kBeta1 * m[k] + (1.0 - AdamState::kBeta1) * gk;
      v[k] = AdamState::kBeta2 * v[k] + (1.0 - AdamState::kBeta2) * gk * gk;
      const double mhat = m[k] / bias1;
      const double vhat = v[k] / bias2;
      w[k] -= lr * mhat / (std::sqrt(vhat) + AdamState::kEpsilon);
    }
  }
}

std::vector<double> fit(ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                        const TrainConfig& cfg, const Objective& objective,
                        const TensorSelection& update, const EpochHook& hook) {
  cfg.validate();
  std::vector<double> losses;
  losses.reserve(cfg.epochs);
  AdamState state = AdamState::zeros_for(p);
  std::mt19937_64 rng(derive_seed(cfg.seed, "dropout"));
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    DropoutMask mask;
    const bool use_dropout = cfg.dropout > 0.0;
    if (use_dropout) mask = sample_dropout_mask(X.rows(), p.hidden_dim(), cfg.dropout, rng);
    const DropoutMask* mask_ptr = use_dropout ? &mask : nullptr;
    const ForwardCache cache = forward_cached(p, adj, X, mask_ptr);
    const ObjectiveValue value = objective(cache);
    const ModelParams grads =
        backward(p, adj, cache, value.dZ, value.dH.empty() ? nullptr : &value.dH, mask_ptr);
    adam_step(state, p, grads, cfg.lr, cfg.weight_decay, epoch, update);
    losses.push_back(value.loss);
    if (hook) hook(epoch, value.loss, p);
  }
  return losses;
}

Objective cross_entropy_objective(std::span<const int> labels, std::span<const NodeId> nodes) {
  require(!nodes.empty(), ErrorCode::EmptyMask, "loss mask is empty");
  return [labels, nodes](const ForwardCache& cache) {
    const std::size_t c = cache.Z.cols();
    ObjectiveValue out;
    out.dZ = Matrix(cache.Z.rows(), c);
    std::vector<double> prob(c);
    const double inv = 1.0 / static_cast<double>(nodes.size());
    for (NodeId v : nodes) {
      softmax_into(cache.Z.row(v), prob);
      const auto y = static_cast<std::size_t>(labels[v]);
      out.loss -= std::log(prob[y]) * inv;
      auto d = out.dZ.row(v);
      for (std::size_t j = 0; j < c; ++j) d[j] += inv * (prob[j] - (j == y ? 1.0 : 0.0));
    }
    return out;
  };
}

namespace {

TrainResult run_supervised(ModelParams p, const SparseMatrix& adj, const Matrix& X,
                           std::span<const int> labels, std::span<const NodeId> train_nodes,
                           std::span<const NodeId> val_nodes, const TrainConfig& cfg) {
  TrainResult result;
  if (cfg.epochs == 0) {
    result.params = std::move(p);
    return result;
  }
  result.history.reserve(cfg.epochs);
  auto hook = [&](std::size_t, double loss, const ModelParams& current) {
    EpochRecord rec;
    rec.train_loss = loss;
    if (!val_nodes.empty()) rec.val_accuracy = accuracy(forward(current, adj, X).Z, labels, val_nodes);
    result.history.push_back(rec);
  };
  fit(p, adj, X, cfg, cross_entropy_objective(labels, train_nodes), kAllTensors, hook);
  result.params = std::move(p);
  return result;
}

}  // namespace

TrainResult train(const Graph& g, const SparseMatrix& adj, const Splits& splits,
                  std::size_t hidden, const TrainConfig& cfg) {
  cfg.validate();
  ModelParams p = init_params(g.feature_dim(), hidden, g.num_classes(), cfg.seed);
  return run_supervised(std::move(p), adj, g.features(), g.labels(), splits.train, splits.val,
                        cfg);
}

TrainResult finetune(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                     std::span<const int> labels, std::span<const NodeId> train_nodes,
                     std::span<const NodeId> val_nodes, const TrainConfig& cfg) {
  cfg.validate();
  return run_supervised(p, adj, X, labels, train_nodes, val_nodes, cfg);
}

TrainConfig finetune_defaults(std::uint64_t seed, double dropout) {
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.lr = 1e-3;
  cfg.weight_decay = 1e-5;
  cfg.dropout = dropout;
  cfg.seed = seed;
  return cfg;
}

}  // namespace cited
