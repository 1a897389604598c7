#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cited/error.hpp"
#include "cited/model.hpp"
#include "cited/optim.hpp"
#include "oracles/finite_diff.hpp"
#include "support/fixtures.hpp"

using namespace cited;

namespace {

std::vector<NodeId> all_nodes(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_SUITE("nn") {
  TEST_CASE("init_params shapes and determinism") {
    const ModelParams a = init_params(4, 8, 3, 17);
    CHECK(a.W1.rows() == 4);
    CHECK(a.W1.cols() == 8);
    CHECK(a.W2.rows() == 8);
    CHECK(a.Wc.rows() == 8);
    CHECK(a.Wc.cols() == 3);
    CHECK(a.bc.cols() == 3);
    const ModelParams b = init_params(4, 8, 3, 17);
    CHECK(a.W1 == b.W1);
    CHECK(a.W2 == b.W2);
    CHECK(a.Wc == b.Wc);
    for (double v : a.b1.values()) CHECK(v == 0.0);
  }

  TEST_CASE("Glorot weights are centred over 1000 seeds") {
    double sum = 0;
    std::size_t count = 0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const ModelParams p = init_params(4, 8, 3, s);
      for (double v : p.W1.values()) sum += v;
      count += p.W1.size();
    }
    CHECK(std::abs(sum / static_cast<double>(count)) <= 0.01);
  }

  TEST_CASE("zero weights produce H = 0 and Z = bc") {
    const Graph g = fixtures::random_graph(5, 3, 2, 0.5, 1);
    ModelParams p = init_params(3, 4, 2, 1).zeros_like();
    p.bc = Matrix(1, 2, std::vector<double>{0.25, -1.5});
    const ForwardOutputs out = forward(p, normalized_adjacency(g), g.features());
    for (double v : out.H.values()) CHECK(v == 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(out.Z(i, 0) == 0.25);
      CHECK(out.Z(i, 1) == -1.5);
    }
  }

  TEST_CASE("single node hand evaluation") {
    const Graph g = build_graph(1, {}, Matrix(1, 1, 2.0), {0}, 1);
    ModelParams p = init_params(1, 1, 1, 0).zeros_like();
    p.W1(0, 0) = p.W2(0, 0) = p.Wc(0, 0) = 1.0;
    const ForwardOutputs out = forward(p, normalized_adjacency(g), g.features());
    CHECK(out.H(0, 0) == 2.0);
    CHECK(out.Z(0, 0) == 2.0);
  }

  TEST_CASE("inference is bit-identical across calls") {
    const Graph g = fixtures::random_graph(10, 3, 3, 0.3, 2);
    const ModelParams p = fixtures::random_params(3, 5, 3, 2);
    const SparseMatrix a = normalized_adjacency(g);
    const ForwardOutputs x = forward(p, a, g.features());
    const ForwardOutputs y = forward(p, a, g.features());
    CHECK(x.H == y.H);
    CHECK(x.Z == y.Z);
  }

  TEST_CASE("uniform logits give loss ln c") {
    const Graph g = fixtures::random_graph(6, 3, 3, 0.5, 3);
    const ModelParams p = init_params(3, 4, 3, 3).zeros_like();
    const auto nodes = all_nodes(6);
    const auto lg = cross_entropy_loss_and_grads(p, normalized_adjacency(g), g.features(),
                                                 g.labels(), nodes);
    CHECK(lg.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  }

  TEST_CASE("empty mask is rejected") {
    const Graph g = fixtures::random_graph(4, 2, 2, 0.5, 4);
    const ModelParams p = init_params(2, 3, 2, 4);
    try {
      cross_entropy_loss_and_grads(p, normalized_adjacency(g), g.features(), g.labels(), {});
      FAIL("expected EmptyMask");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyMask);
    }
  }

  TEST_CASE("analytic gradients match central differences on 20 random 6-node instances") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Graph g = fixtures::random_graph(6, 3, 3, 0.4, 100 + s);
      const SparseMatrix a = normalized_adjacency(g);
      const ModelParams p = fixtures::random_params(3, 4, 3, 200 + s);
      std::mt19937_64 rng(s);
      const DropoutMask mask = sample_dropout_mask(6, 4, 0.5, rng);
      const std::vector<NodeId> nodes{0, 2, 3, 5};
      const auto lg = cross_entropy_loss_and_grads(p, a, g.features(), g.labels(), nodes, &mask);
      const auto res = oracle::check_gradients(p, lg.grads, [&](const ModelParams& q) {
        return cross_entropy_loss_and_grads(q, a, g.features(), g.labels(), nodes, &mask).loss;
      });
      CHECK(res.max_rel_error < 1e-4);
    }
  }

  TEST_CASE("gradients are unchanged when every masked node is duplicated") {
    const Graph g = fixtures::random_graph(6, 3, 3, 0.4, 8);
    const SparseMatrix a = normalized_adjacency(g);
    const ModelParams p = fixtures::random_params(3, 4, 3, 8);
    const std::vector<NodeId> once{1, 4};
    const std::vector<NodeId> twice{1, 4, 1, 4};
    const auto x = cross_entropy_loss_and_grads(p, a, g.features(), g.labels(), once);
    const auto y = cross_entropy_loss_and_grads(p, a, g.features(), g.labels(), twice);
    CHECK(x.loss == doctest::Approx(y.loss).epsilon(1e-14));
    auto gx = x.grads.tensors();
    auto gy = y.grads.tensors();
    for (std::size_t t = 0; t < ModelParams::kTensorCount; ++t)
      for (std::size_t i = 0; i < gx[t]->size(); ++i)
        CHECK(gx[t]->values()[i] == doctest::Approx(gy[t]->values()[i]).epsilon(1e-12));
  }

  TEST_CASE("dropout mask entries are 0 or 1/(1-p)") {
    std::mt19937_64 rng(1);
    const DropoutMask m = sample_dropout_mask(30, 10, 0.5, rng);
    std::size_t kept = 0;
    for (double v : m.values()) {
      CHECK((v == 0.0 || v == 2.0));
      kept += v > 0;
    }
    CHECK(kept > 100);
    CHECK(kept < 200);
  }

  TEST_CASE("adam_step") {
    const ModelParams p0 = fixtures::random_params(3, 4, 2, 5);
    SUBCASE("zero gradient without weight decay leaves params unchanged") {
      ModelParams p = p0;
      AdamState st = AdamState::zeros_for(p);
      adam_step(st, p, p.zeros_like(), 1e-3, 0.0, 1);
      CHECK(p.W1 == p0.W1);
      CHECK(p.bc == p0.bc);
    }
    SUBCASE("first step moves every coordinate by about lr") {
      ModelParams p = p0;
      ModelParams g = p.zeros_like();
      std::mt19937_64 rng(3);
      std::normal_distribution<double> n(0.0, 1.0);
      for (auto* t : g.tensors())
        for (double& v : t->values()) v = n(rng);
      AdamState st = AdamState::zeros_for(p);
      const double lr = 1e-3;
      adam_step(st, p, g, lr, 0.0, 1);
      auto after = p.tensors();
      auto before = p0.tensors();
      auto grads = g.tensors();
      for (std::size_t t = 0; t < ModelParams::kTensorCount; ++t)
        for (std::size_t i = 0; i < after[t]->size(); ++i) {
          const double gi = grads[t]->values()[i];
          const double expected = lr * gi / (std::abs(gi) + 1e-8);
          CHECK(before[t]->values()[i] - after[t]->values()[i] ==
                doctest::Approx(expected).epsilon(1e-9));
        }
    }
    SUBCASE("weight decay reaches weights but not biases") {
      ModelParams p = p0;
      AdamState st = AdamState::zeros_for(p);
      adam_step(st, p, p.zeros_like(), 1e-3, 0.1, 1);
      CHECK(p.W1 != p0.W1);
      CHECK(p.b1 == p0.b1);
      CHECK(p.bc == p0.bc);
    }
    SUBCASE("identical calls give identical results") {
      ModelParams a = p0, b = p0;
      AdamState sa = AdamState::zeros_for(a), sb = AdamState::zeros_for(b);
      const ModelParams g = fixtures::random_params(3, 4, 2, 6);
      for (std::size_t t = 1; t <= 3; ++t) {
        adam_step(sa, a, g, 1e-2, 1e-5, t);
        adam_step(sb, b, g, 1e-2, 1e-5, t);
      }
      CHECK(a.W2 == b.W2);
      CHECK(a.bc == b.bc);
    }
  }

  TEST_CASE("training on the acceptance instance") {
    const auto& inst = fixtures::acceptance_instance();
    const Graph& g = inst.ds.graph;
    const Matrix z = forward(inst.target.pretrained, inst.adj, g.features()).Z;
    CHECK(accuracy(z, g.labels(), inst.ds.splits.train) >= 0.95);
    CHECK(inst.target.train_accuracy_deployed >= inst.target.train_accuracy_pretrained - 0.05);
  }

  TEST_CASE("train determinism and zero epochs") {
    SbmConfig sc;
    sc.seed = 12;
    sc.nodes_per_block = 20;
    sc.train_per_class = 5;
    sc.val_per_class = 5;
    const Dataset ds = sbm_generate(sc);
    const SparseMatrix a = normalized_adjacency(ds.graph);
    TrainConfig tc;
    tc.epochs = 20;
    tc.seed = 3;
    const TrainResult x = train(ds.graph, a, ds.splits, 8, tc);
    const TrainResult y = train(ds.graph, a, ds.splits, 8, tc);
    REQUIRE(x.history.size() == 20);
    for (std::size_t e = 0; e < 20; ++e) {
      CHECK(x.history[e].train_loss == y.history[e].train_loss);
      CHECK(x.history[e].val_accuracy == y.history[e].val_accuracy);
    }
    CHECK(x.params.W1 == y.params.W1);

    tc.epochs = 0;
    const TrainResult z = train(ds.graph, a, ds.splits, 8, tc);
    CHECK(z.params.W1 == init_params(sc.feat_dim, 8, 3, 3).W1);

    const TrainResult f = finetune(x.params, a, ds.graph.features(), ds.graph.labels(),
                                   ds.splits.train, ds.splits.val, tc);
    CHECK(f.params.W1 == x.params.W1);
    CHECK(f.params.bc == x.params.bc);
  }

  TEST_CASE("finetune is deterministic under its seed") {
    SbmConfig sc;
    sc.seed = 13;
    sc.nodes_per_block = 20;
    sc.train_per_class = 5;
    sc.val_per_class = 5;
    const Dataset ds = sbm_generate(sc);
    const SparseMatrix a = normalized_adjacency(ds.graph);
    const ModelParams p = init_params(sc.feat_dim, 8, 3, 1);
    const TrainConfig ft = finetune_defaults(77);
    CHECK(ft.epochs == 50);
    const auto x = finetune(p, a, ds.graph.features(), ds.graph.labels(), ds.splits.train,
                            ds.splits.val, ft);
    const auto y = finetune(p, a, ds.graph.features(), ds.graph.labels(), ds.splits.train,
                            ds.splits.val, ft);
    CHECK(x.params.W2 == y.params.W2);
  }

  TEST_CASE("train config validation") {
    TrainConfig tc;
    tc.lr = 0;
    CHECK_THROWS_AS(tc.validate(), Error);
    tc.lr = 1e-3;
    tc.dropout = 1.0;
    CHECK_THROWS_AS(tc.validate(), Error);
  }
}
