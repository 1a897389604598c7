#include "cited/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cited/error.hpp"
#include "cited/hash.hpp"
#include "cited/parallel.hpp"
#include "cited/surgery.hpp"

namespace cited {

void QueryConfig::validate() const {
  require(boundary_fraction >= 0.0 && boundary_fraction <= 1.0, ErrorCode::ConfigInvalid,
          "query: boundary_fraction must be in [0,1]");
}

std::vector<NodeId> build_query_set(const Matrix& target_logits, std::span<const NodeId> universe,
                                    const QueryConfig& cfg) {
  cfg.validate();
  require(cfg.total <= universe.size(), ErrorCode::InvalidArgument,
          "query total exceeds the number of queryable nodes");
  const auto n_boundary = std::min(
      cfg.total,
      static_cast<std::size_t>(std::llround(cfg.boundary_fraction * static_cast<double>(cfg.total))));

  std::vector<double> gap(universe.size());
  std::vector<double> prob(target_logits.cols());
  for (std::size_t k = 0; k < universe.size(); ++k) {
    softmax_into(target_logits.row(universe[k]), prob);
    std::partial_sort(prob.begin(), prob.begin() + std::min<std::ptrdiff_t>(2, prob.size()),
                      prob.end(), std::greater<>());
    gap[k] = prob.size() >= 2 ? prob[0] - prob[1] : prob[0];
  }
  std::vector<std::size_t> order(universe.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (gap[a] != gap[b]) return gap[a] < gap[b];
    return universe[a] < universe[b];
  });

  std::vector<NodeId> chosen;
  chosen.reserve(cfg.total);
  for (std::size_t k = 0; k < n_boundary; ++k) chosen.push_back(universe[order[k]]);

  std::vector<NodeId> rest;
  for (std::size_t k = n_boundary; k < order.size(); ++k) rest.push_back(universe[order[k]]);
  std::sort(rest.begin(), rest.end());
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t k = 0; k < cfg.total - n_boundary; ++k) chosen.push_back(rest[k]);

  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<NodeId> build_query_set(const Matrix& target_logits, const QueryConfig& cfg) {
  std::vector<NodeId> all(target_logits.rows());
  std::iota(all.begin(), all.end(), NodeId{0});
  return build_query_set(target_logits, all, cfg);
}

QueryResponses answer_queries(const ModelParams& target, const SparseMatrix& adj,
                              const Matrix& features, std::span<const NodeId> nodes) {
  const ForwardOutputs out = forward(target, adj, features);
  QueryResponses r;
  r.nodes.assign(nodes.begin(), nodes.end());
  r.embeddings = select_rows(out.H, nodes);
  r.logits = select_rows(out.Z, nodes);
  return r;
}

namespace {

constexpr TensorSelection kPropagationOnly{true, true, true, true, false, false};

void check_responses(const QueryResponses& r, const AttackSurface& s) {
  require(!r.nodes.empty(), ErrorCode::EmptyMask, "no query responses");
  require(r.embeddings.rows() == r.nodes.size() && r.logits.rows() == r.nodes.size(),
          ErrorCode::ShapeMismatch, "responses must have one row per queried node");
  for (NodeId v : r.nodes)
    require(v < s.features.rows(), ErrorCode::IndexOutOfRange, "queried node out of range");
}

}  // namespace

ModelParams extract_embedding_level(const QueryResponses& responses, const AttackSurface& surface,
                                    std::size_t hidden, const TrainConfig& cfg,
                                    std::size_t head_epochs) {
  check_responses(responses, surface);
  require(hidden == responses.embeddings.cols(), ErrorCode::DimMismatch,
          "embedding-level surrogate width must equal the released embedding width");
  const std::size_t classes = responses.logits.cols();
  ModelParams p = init_params(surface.features.cols(), hidden, classes, cfg.seed);
  p.provenance = Provenance::surrogate;

  const auto& nodes = responses.nodes;
  const double inv = 1.0 / static_cast<double>(nodes.size());
  auto mse = [&](const ForwardCache& cache) {
    ObjectiveValue out;
    out.dZ = Matrix(cache.Z.rows(), cache.Z.cols());
    out.dH = Matrix(cache.H.rows(), cache.H.cols());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      auto h = cache.H.row(nodes[k]);
      auto o = responses.embeddings.row(k);
      auto d = out.dH.row(nodes[k]);
      for (std::size_t j = 0; j < h.size(); ++j) {
        const double diff = h[j] - o[j];
        out.loss += diff * diff * inv;
        d[j] += 2.0 * diff * inv;
      }
    }
    return out;
  };
  fit(p, surface.adjacency, surface.features, cfg, mse, kPropagationOnly);

  if (head_epochs > 0) {
    std::vector<int> labels(surface.features.rows(), 0);
    const auto released = argmax_rows(responses.logits);
    for (std::size_t k = 0; k < nodes.size(); ++k) labels[nodes[k]] = released[k];
    TrainConfig head = cfg;
    head.epochs = head_epochs;
    head.seed = derive_seed(cfg.seed, "head");
    fit(p, surface.adjacency, surface.features, head, cross_entropy_objective(labels, nodes),
        kClassifierOnly);
  }
  return p;
}

double distillation_loss(const Matrix& teacher, const Matrix& student, double temperature) {
  require(teacher.same_shape(student), ErrorCode::ShapeMismatch, "logit shapes differ");
  require(temperature > 0.0, ErrorCode::InvalidArgument, "temperature must be > 0");
  const std::size_t c = teacher.cols();
  std::vector<double> zt(c), zs(c), pt(c), ps(c);
  double loss = 0.0;
  for (std::size_t k = 0; k < teacher.rows(); ++k) {
    for (std::size_t j = 0; j < c; ++j) {
      zt[j] = teacher(k, j) / temperature;
      zs[j] = student(k, j) / temperature;
    }
    softmax_into(zt, pt);
    softmax_into(zs, ps);
    for (std::size_t j = 0; j < c; ++j)
      if (pt[j] > 0.0) loss += pt[j] * (std::log(pt[j]) - std::log(ps[j]));
  }
  return temperature * temperature * loss / static_cast<double>(teacher.rows());
}

ModelParams extract_label_level(const QueryResponses& responses, const AttackSurface& surface,
                                std::size_t hidden, const TrainConfig& cfg, double temperature) {
  check_responses(responses, surface);
  require(temperature > 0.0, ErrorCode::InvalidArgument, "temperature must be > 0");
  const std::size_t classes = responses.logits.cols();
  ModelParams p = init_params(surface.features.cols(), hidden, classes, cfg.seed);
  p.provenance = Provenance::surrogate;

  const auto& nodes = responses.nodes;
  const double inv = 1.0 / static_cast<double>(nodes.size());
  const Matrix teacher_probs = [&] {
    Matrix scaled = responses.logits;
    for (double& x : scaled.values()) x /= temperature;
    return softmax_rows(scaled);
  }();
  auto kd = [&](const ForwardCache& cache) {
    ObjectiveValue out;
    out.dZ = Matrix(cache.Z.rows(), classes);
    std::vector<double> zs(classes), ps(classes);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      auto z = cache.Z.row(nodes[k]);
      for (std::size_t j = 0; j < classes; ++j) zs[j] = z[j] / temperature;
      softmax_into(zs, ps);
      auto pt = teacher_probs.row(k);
      auto d = out.dZ.row(nodes[k]);
      for (std::size_t j = 0; j < classes; ++j) {
        if (pt[j] > 0.0) out.loss += temperature * temperature * inv * pt[j] *
                                     (std::log(pt[j]) - std::log(ps[j]));
        d[j] += temperature * inv * (ps[j] - pt[j]);
      }
    }
    return out;
  };
  fit(p, surface.adjacency, surface.features, cfg, kd);
  return p;
}

ModelParams train_independent(const Graph& g, const SparseMatrix& adj, const Splits& splits,
                              std::size_t hidden, const TrainConfig& cfg, std::uint64_t seed) {
  TrainConfig c = cfg;
  c.seed = seed;
  ModelParams p = train(g, adj, splits, hidden, c).params;
  p.provenance = Provenance::independent;
  return p;
}

Matrix shift_queries(const Matrix& X, std::span<const NodeId> rows, double sigma,
                     std::uint64_t seed) {
  require(sigma >= 0.0, ErrorCode::InvalidArgument, "sigma must be >= 0");
  Matrix out = X;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (NodeId v : rows) {
    require(v < X.rows(), ErrorCode::IndexOutOfRange, "shifted row out of range");
    for (double& x : out.row(v)) x += noise(rng);
  }
  return out;
}

std::string_view to_string(RemovalKind kind) {
  switch (kind) {
    case RemovalKind::none: return "none";
    case RemovalKind::prune30: return "prune30";
    case RemovalKind::finetune: return "finetune";
  }
  return "none";
}

RemovalKind removal_from_string(std::string_view s) {
  if (s == "none") return RemovalKind::none;
  if (s == "prune30") return RemovalKind::prune30;
  if (s == "finetune") return RemovalKind::finetune;
  fail(ErrorCode::ParseError, "unknown removal kind '" + std::string(s) + "'");
}

ModelParams apply_removal(const ModelParams& surrogate, RemovalKind kind,
                          const AttackSurface& surface, std::span<const NodeId> unseen_nodes,
                          std::uint64_t seed, double dropout) {
  switch (kind) {
    case RemovalKind::none: return surrogate;
    case RemovalKind::prune30: return prune_weights(surrogate, 0.30);
    case RemovalKind::finetune: {
      if (unseen_nodes.empty()) return surrogate;
      const auto own = argmax_rows(forward(surrogate, surface.adjacency, surface.features).Z);
      ModelParams tuned = finetune(surrogate, surface.adjacency, surface.features, own,
                                   unseen_nodes, {}, finetune_defaults(seed, dropout))
                              .params;
      tuned.provenance = surrogate.provenance;
      tuned.seed = surrogate.seed;
      return tuned;
    }
  }
  return surrogate;
}

std::vector<NodeId> attacker_universe(std::size_t n, const Splits& splits) {
  std::vector<char> blocked(n, 0);
  for (NodeId v : splits.train) blocked[v] = 1;
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v)
    if (!blocked[v]) out.push_back(v);
  return out;
}

std::vector<PoolMember> build_surrogates(const ModelParams& target, const SparseMatrix& adj,
                                         const Matrix& features,
                                         std::span<const NodeId> universe,
                                         const PoolConfig& cfg) {
  const Matrix target_logits = forward(target, adj, features).Z;
  const std::size_t hidden = cfg.surrogate_hidden == 0 ? target.hidden_dim() : cfg.surrogate_hidden;
  std::vector<PoolMember> out(cfg.surrogates);
  parallel_for(cfg.surrogates, cfg.workers, [&](std::size_t i) {
    const std::string tag = std::string(to_string(cfg.level)) + "/surrogate/" + std::to_string(i);
    const std::uint64_t seed = derive_seed(cfg.seed, tag);
    QueryConfig q;
    q.total = cfg.query_total;
    q.boundary_fraction = cfg.boundary_fraction;
    q.seed = derive_seed(seed, "query");
    std::vector<NodeId> queries = build_query_set(target_logits, universe, q);

    const Matrix served = shift_queries(features, queries, cfg.shift_sigma, derive_seed(seed, "shift"));
    const QueryResponses responses = answer_queries(target, adj, served, queries);
    const AttackSurface surface{adj, served};

    TrainConfig tc = cfg.train;
    tc.seed = seed;
    ModelParams p = cfg.level == OutputLevel::embedding
                        ? extract_embedding_level(responses, surface, hidden, tc)
                        : extract_label_level(responses, surface, hidden, tc, cfg.temperature);

    std::vector<NodeId> unseen;
    std::set_difference(universe.begin(), universe.end(), queries.begin(), queries.end(),
                        std::back_inserter(unseen));
    p = apply_removal(p, cfg.removal, surface, unseen, derive_seed(seed, "removal"),
                      cfg.train.dropout);
    p.provenance = Provenance::surrogate;
    p.seed = seed;

    PoolMember& m = out[i];
    m.id = "surrogate_" + std::string(to_string(cfg.level)) + "_" + std::to_string(i);
    m.params = std::move(p);
    m.seed = seed;
    m.level = cfg.level;
    m.removal = cfg.removal;
    m.queries = std::move(queries);
  });
  return out;
}

std::vector<PoolMember> build_independents(const Graph& g, const SparseMatrix& adj,
                                           const Splits& splits, const PoolConfig& cfg,
                                           std::size_t required_width) {
  require(!cfg.independent_hidden.empty(), ErrorCode::ConfigInvalid,
          "independent_hidden must list at least one width");
  std::vector<PoolMember> out(cfg.independents);
  parallel_for(cfg.independents, cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(cfg.seed, "independent/" + std::to_string(i));
    const std::size_t hidden = required_width != 0
                                   ? required_width
                                   : cfg.independent_hidden[i % cfg.independent_hidden.size()];
    PoolMember& m = out[i];
    m.id = "independent_" + std::to_string(i);
    m.params = train_independent(g, adj, splits, hidden, cfg.train, seed);
    m.params.seed = seed;
    m.seed = seed;
    m.level = cfg.level;
  });
  return out;
}

ModelPool build_pool(const Graph& g, const SparseMatrix& adj, const Splits& splits,
                     const ModelParams& target, const PoolConfig& cfg) {
  ModelPool pool;
  const auto universe = attacker_universe(g.num_nodes(), splits);
  pool.surrogates = build_surrogates(target, adj, g.features(), universe, cfg);
  const std::size_t width = cfg.level == OutputLevel::embedding ? target.hidden_dim() : 0;
  pool.independents = build_independents(g, adj, splits, cfg, width);
  return pool;
}

}  // namespace cited
