#include "cited/model.hpp"

#include <cmath>
#include <string>

#include "cited/error.hpp"

namespace cited {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::target: return "target";
    case Provenance::surrogate: return "surrogate";
    case Provenance::independent: return "independent";
  }
  return "target";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "target") return Provenance::target;
  if (s == "surrogate") return Provenance::surrogate;
  if (s == "independent") return Provenance::independent;
  fail(ErrorCode::ParseError, "unknown provenance '" + std::string(s) + "'");
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  auto dst = z.tensors();
  auto src = tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) *dst[i] = Matrix(src[i]->rows(), src[i]->cols());
  z.seed = seed;
  z.provenance = provenance;
  return z;
}

void ModelParams::validate() const {
  const auto h = W1.cols();
  const auto c = Wc.cols();
  require(b1.rows() == 1 && b1.cols() == h && W2.rows() == h && W2.cols() == h &&
              b2.rows() == 1 && b2.cols() == h && Wc.rows() == h && bc.rows() == 1 &&
              bc.cols() == c,
          ErrorCode::ShapeMismatch, "parameter shape chain d0->h->h->c is inconsistent");
  for (const Matrix* t : tensors())
    require(t->all_finite(), ErrorCode::InvariantViolation, "non-finite parameter entry");
}

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(fan_in, fan_out);
  for (double& x : w.values()) x = dist(rng);
  return w;
}

}  // namespace

ModelParams init_params(std::size_t d0, std::size_t h, std::size_t c, std::uint64_t seed) {
  require(d0 >= 1 && h >= 1 && c >= 1, ErrorCode::InvalidArgument, "dimensions must be >= 1");
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.W1 = glorot(d0, h, rng);
  p.b1 = Matrix(1, h);
  p.W2 = glorot(h, h, rng);
  p.b2 = Matrix(1, h);
  p.Wc = glorot(h, c, rng);
  p.bc = Matrix(1, c);
  p.seed = seed;
  return p;
}

DropoutMask sample_dropout_mask(std::size_t rows, std::size_t cols, double dropout,
                                std::mt19937_64& rng) {
  require(dropout >= 0.0 && dropout < 1.0, ErrorCode::InvalidArgument, "dropout must be in [0,1)");
  DropoutMask mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - dropout);
  std::bernoulli_distribution keep(1.0 - dropout);
  for (double& x : mask.values()) x = keep(rng) ? keep_scale : 0.0;
  return mask;
}

ForwardCache forward_cached(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                            const DropoutMask* mask) {
  require(X.rows() == adj.n, ErrorCode::ShapeMismatch, "feature rows differ from node count");
  require(X.cols() == p.input_dim(), ErrorCode::ShapeMismatch, "feature width differs from W1");
  ForwardCache c;
  c.AX = spmm(adj, X);
  c.pre1 = matmul(c.AX, p.W1);
  add_row_vector(c.pre1, p.b1);
  c.hid1 = relu(c.pre1);
  if (mask != nullptr) {
    require(mask->same_shape(c.hid1), ErrorCode::ShapeMismatch, "dropout mask shape");
    auto hv = c.hid1.values();
    auto mv = mask->values();
    for (std::size_t i = 0; i < hv.size(); ++i) hv[i] *= mv[i];
  }
  c.AH1 = spmm(adj, c.hid1);
  c.pre2 = matmul(c.AH1, p.W2);
  add_row_vector(c.pre2, p.b2);
  c.H = relu(c.pre2);
  c.Z = matmul(c.H, p.Wc);
  add_row_vector(c.Z, p.bc);
  return c;
}

ForwardOutputs forward(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                       const DropoutMask* mask) {
  ForwardCache c = forward_cached(p, adj, X, mask);
  return {std::move(c.H), std::move(c.Z)};
}

ModelParams backward(const ModelParams& p, const SparseMatrix& adj, const ForwardCache& cache,
                     const Matrix& dZ, const Matrix* dH_extra, const DropoutMask* mask) {
  require(dZ.same_shape(cache.Z), ErrorCode::ShapeMismatch, "dZ shape differs from logits");
  ModelParams g;
  g.seed = p.seed;
  g.provenance = p.provenance;

  g.Wc = matmul_tn(cache.H, dZ);
  g.bc = column_sums(dZ);
  Matrix dH = matmul_nt(dZ, p.Wc);
  if (dH_extra != nullptr) {
    require(dH_extra->same_shape(dH), ErrorCode::ShapeMismatch, "dH shape differs from H");
    auto a = dH.values();
    auto b = dH_extra->values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  }

  Matrix dpre2 = std::move(dH);
  {
    auto d = dpre2.values();
    auto pre = cache.pre2.values();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (pre[i] <= 0.0) d[i] = 0.0;
  }
  g.W2 = matmul_tn(cache.AH1, dpre2);
  g.b2 = column_sums(dpre2);

  Matrix dpre1 = spmm_t(adj, matmul_nt(dpre2, p.W2));
  {
    auto d = dpre1.values();
    auto pre = cache.pre1.values();
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (pre[i] <= 0.0) d[i] = 0.0;
      else if (mask != nullptr) d[i] *= mask->values()[i];
    }
  }
  g.W1 = matmul_tn(cache.AX, dpre1);
  g.b1 = column_sums(dpre1);
  return g;
}

LossAndGrads cross_entropy_loss_and_grads(const ModelParams& p, const SparseMatrix& adj,
                                          const Matrix& X, std::span<const int> labels,
                                          std::span<const NodeId> nodes,
                                          const DropoutMask* mask) {
  require(!nodes.empty(), ErrorCode::EmptyMask, "loss mask is empty");
  require(labels.size() == X.rows(), ErrorCode::ShapeMismatch, "label count differs from n");
  ForwardCache cache = forward_cached(p, adj, X, mask);
  const auto c = p.num_classes();
  Matrix dZ(cache.Z.rows(), c);
  std::vector<double> prob(c);
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(nodes.size());
  for (NodeId v : nodes) {
    softmax_into(cache.Z.row(v), prob);
    const auto y = static_cast<std::size_t>(labels[v]);
    loss -= std::log(prob[y]);
    auto d = dZ.row(v);
    for (std::size_t j = 0; j < c; ++j) d[j] += inv * (prob[j] - (j == y ? 1.0 : 0.0));
  }
  LossAndGrads out;
  out.loss = loss * inv;
  out.grads = backward(p, adj, cache, dZ, nullptr, mask);
  return out;
}

LossAndGrads loss_and_grads(const ModelParams& p, const SparseMatrix& adj, const Matrix& X,
                            std::span<const int> labels, std::span<const NodeId> nodes,
                            double dropout, std::mt19937_64& rng) {
  if (dropout <= 0.0) return cross_entropy_loss_and_grads(p, adj, X, labels, nodes, nullptr);
  const DropoutMask mask = sample_dropout_mask(X.rows(), p.hidden_dim(), dropout, rng);
  return cross_entropy_loss_and_grads(p, adj, X, labels, nodes, &mask);
}

double accuracy(const Matrix& logits, std::span<const int> labels,
                std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  const auto pred = argmax_rows(logits);
  std::size_t hit = 0;
  for (NodeId v : nodes) hit += pred[v] == labels[v] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(nodes.size());
}

}  // namespace cited
