#include <doctest.h>

#include <cmath>
#include <sstream>

#include "explore/gnn/adam.hpp"
#include "explore/gnn/checkpoint.hpp"
#include "explore/gnn/network.hpp"
#include "gradcheck.hpp"
#include "graph_fixtures.hpp"

using namespace explore;
using namespace explore::gnn;

namespace {

Eigen::MatrixXd dense_adjacency(const NormalizedAdjacency& adj) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(adj.n, adj.n);
  for (int i = 0; i < adj.n; ++i) {
    for (const auto& [j, w] : adj.rows[i]) m(i, j) += w;
  }
  return m;
}

PolicyParameters zeroed(PolicyParameters p) {
  for (auto& [name, tensor] : p.tensors) tensor.setZero();
  return p;
}

}  // namespace

TEST_CASE("normalize_adjacency basics") {
  SUBCASE("single node is its own self loop") {
    ExplorationGraph g;
    g.nodes.push_back({NodeKind::Pose, {0.0, 0.0}, {}});
    g.current_pose_node = 0;
    const auto adj = normalize_adjacency(g);
    const Eigen::MatrixXd m = dense_adjacency(adj);
    CHECK(m.rows() == 1);
    CHECK(m(0, 0) == doctest::Approx(1.0));
  }

  SUBCASE("distance 0 gives affinity 1") {
    ExplorationGraph g;
    g.nodes.push_back({NodeKind::Pose, {1.0, 1.0}, {}});
    g.nodes.push_back({NodeKind::Frontier, {1.0, 1.0}, {}});
    g.current_pose_node = 0;
    g.frontier_nodes = {1};
    g.edges.push_back({0, 1, 0.0});
    const Eigen::MatrixXd m = dense_adjacency(normalize_adjacency(g));
    // degree 2 each: A_hat = [[1,1],[1,1]] / 2
    CHECK(m(0, 1) == doctest::Approx(0.5));
    CHECK(m(0, 0) == doctest::Approx(0.5));
  }

  SUBCASE("symmetric on random graphs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto g = fixtures::random_graph(seed, 24);
      const Eigen::MatrixXd m = dense_adjacency(normalize_adjacency(g));
      CHECK((m - m.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("gcn_forward zero weights give zero embeddings") {
  const auto g = fixtures::random_graph(3, 12);
  const GraphBatch batch = make_batch(g);
  const PolicyParameters p = zeroed(init_params(LayerKind::GCN, 8, 0));
  const Eigen::MatrixXd h = forward_embeddings(batch, p);
  CHECK(h.rows() == g.size());
  CHECK(h.cols() == 8);
  CHECK(h.norm() == 0.0);
}

TEST_CASE("gcn_forward single node is a chained weight product") {
  ExplorationGraph g;
  GraphNode n;
  n.kind = NodeKind::Frontier;
  n.position = {0.0, 0.0};
  n.feature << 0.3, -1.2, 0.5, 0.25, 1.0;
  g.nodes.push_back(n);
  g.current_pose_node = 0;
  g.frontier_nodes = {0};

  PolicyParameters p = init_params(LayerKind::GCN, 4, 11);
  const GraphBatch batch = make_batch(g);
  const Eigen::MatrixXd h = forward_embeddings(batch, p);

  // A_hat = [[1]]; hand-evaluate relu chains on the single feature row
  Eigen::RowVectorXd row = n.feature.transpose();
  Eigen::RowVectorXd h1 = (row * p.at("gcn.w0")).cwiseMax(0.0);
  Eigen::RowVectorXd h2 = (h1 * p.at("gcn.w1")).cwiseMax(0.0);
  Eigen::RowVectorXd h3 = (h2 * p.at("gcn.w2")).cwiseMax(0.0);
  CHECK((h.row(0) - h3).norm() < 1e-15);
}

TEST_CASE("forward passes are exactly permutation equivariant") {
  for (const LayerKind kind : {LayerKind::GCN, LayerKind::GGNN}) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto g = fixtures::random_graph(seed + 40, 20);
      const auto perm = fixtures::random_permutation(g.size(), seed + 1);
      const auto pg = fixtures::permute_graph(g, perm);

      const PolicyParameters p = init_params(kind, 16, 99);
      const Eigen::MatrixXd h = forward_embeddings(make_batch(g), p);
      const Eigen::MatrixXd ph = forward_embeddings(make_batch(pg), p);

      for (int i = 0; i < g.size(); ++i) {
        CHECK((ph.row(perm[i]) - h.row(i)).norm() == 0.0);  // bit-exact
      }
    }
  }
}

TEST_CASE("ggnn_forward with one step and zero messages is a plain GRU") {
  // width-1 scalar fixture, hand-evaluated
  ExplorationGraph g;
  GraphNode n;
  n.kind = NodeKind::Frontier;
  n.position = {0.0, 0.0};
  g.nodes.push_back(n);
  g.current_pose_node = 0;
  g.frontier_nodes = {0};

  PolicyParameters p;
  p.kind = LayerKind::GGNN;
  p.hidden = 1;
  const double h0 = 0.7, uz = 0.4, bz = -0.1, ur = 0.8, br = 0.2, uh = -0.5,
               bh = 0.3;
  p.tensors["ggnn.w_msg"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["ggnn.w_z"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["ggnn.u_z"] = Eigen::MatrixXd::Constant(1, 1, uz);
  p.tensors["ggnn.b_z"] = Eigen::MatrixXd::Constant(1, 1, bz);
  p.tensors["ggnn.w_r"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["ggnn.u_r"] = Eigen::MatrixXd::Constant(1, 1, ur);
  p.tensors["ggnn.b_r"] = Eigen::MatrixXd::Constant(1, 1, br);
  p.tensors["ggnn.w_h"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["ggnn.u_h"] = Eigen::MatrixXd::Constant(1, 1, uh);
  p.tensors["ggnn.b_h"] = Eigen::MatrixXd::Constant(1, 1, bh);
  p.tensors["head.w0"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["head.b0"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["head.w1"] = Eigen::MatrixXd::Zero(1, 1);
  p.tensors["head.b1"] = Eigen::MatrixXd::Zero(1, 1);

  GraphBatch batch;
  batch.adjacency = normalize_adjacency(g);
  batch.features = Eigen::MatrixXd::Constant(1, 1, h0);
  batch.frontier_mask = {1};
  batch.frontier_nodes = {0};

  Tape t;
  const auto vars = register_params(t, p);
  const int out = ggnn_forward(t, batch, p, vars, {}, 1);

  auto sig = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  const double z = sig(h0 * uz + bz);
  const double r = sig(h0 * ur + br);
  const double h_tilde = std::tanh(r * h0 * uh + bh);
  const double expected = (1.0 - z) * h0 + z * h_tilde;
  CHECK(t.value(out)(0, 0) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("ggnn isolated node ignores other nodes' features") {
  ExplorationGraph g = fixtures::random_graph(5, 10);
  // append an isolated frontier node with fixed features
  GraphNode iso;
  iso.kind = NodeKind::Frontier;
  iso.position = {99.0, 99.0};
  iso.feature << 0.5, 1.0, -0.5, 0.5, 1.0;
  const int iso_idx = g.size();
  g.nodes.push_back(iso);
  g.frontier_nodes.push_back(iso_idx);

  const PolicyParameters p = init_params(LayerKind::GGNN, 8, 21);
  const Eigen::MatrixXd h1 = forward_embeddings(make_batch(g), p);

  // shuffle every other node's features; the isolated row must not move
  ExplorationGraph g2 = g;
  for (int i = 0; i < iso_idx; ++i) g2.nodes[i].feature.array() += 0.37;
  const Eigen::MatrixXd h2 = forward_embeddings(make_batch(g2), p);
  CHECK((h1.row(iso_idx) - h2.row(iso_idx)).norm() == 0.0);
  CHECK((h1 - h2).norm() > 0.0);
}

TEST_CASE("policy_head masks to frontiers and normalizes softmax") {
  SUBCASE("single frontier gets probability 1") {
    const auto g = fixtures::random_graph(8, 7);
    REQUIRE(g.frontier_nodes.size() == 1);
    const PolicyParameters p = init_params(LayerKind::GCN, 8, 2);
    const Eigen::VectorXd probs =
        forward_scores(make_batch(g), p, HeadMode::Softmax);
    REQUIRE(probs.size() == 1);
    CHECK(probs(0) == doctest::Approx(1.0));
  }

  SUBCASE("equal embeddings over 4 frontiers are uniform") {
    PolicyParameters p = init_params(LayerKind::GCN, 8, 3);
    GraphBatch batch;
    batch.frontier_nodes = {1, 2, 4, 5};
    batch.frontier_mask = {0, 1, 1, 0, 1, 1};
    Tape t;
    const auto vars = register_params(t, p);
    Eigen::MatrixXd emb(6, 8);
    for (int i = 0; i < 6; ++i) {
      emb.row(i) = Eigen::RowVectorXd::LinSpaced(8, 0.1, 0.8);
    }
    const int probs = policy_head(t, t.leaf(emb), batch, p, vars, HeadMode::Softmax);
    for (int i = 0; i < 4; ++i) {
      CHECK(t.value(probs)(i, 0) == doctest::Approx(0.25).epsilon(1e-12));
    }
  }

  SUBCASE("softmax sums to 1 on random graphs") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = fixtures::random_graph(seed + 100, 15 + 3 * seed);
      const PolicyParameters p = init_params(LayerKind::GGNN, 8, seed);
      const Eigen::VectorXd probs =
          forward_scores(make_batch(g), p, HeadMode::Softmax);
      CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(probs.minCoeff() >= 0.0);
    }
  }

  SUBCASE("no frontier is a contract violation") {
    PolicyParameters p = init_params(LayerKind::GCN, 8, 2);
    GraphBatch batch;
    batch.features = Eigen::MatrixXd::Zero(2, 5);
    Tape t;
    const auto vars = register_params(t, p);
    const int emb = t.leaf(Eigen::MatrixXd::Zero(2, 8));
    CHECK_THROWS_AS(policy_head(t, emb, batch, p, vars, HeadMode::QValues),
                    std::invalid_argument);
  }
}

TEST_CASE("backward: gradient of sum w^2 is 2w") {
  Tape t;
  Eigen::MatrixXd w(2, 2);
  w << 1.0, -2.0, 0.5, 3.0;
  const int leaf = t.leaf(w);
  const int loss = sum_all(t, square(t, leaf));
  t.backward(loss);
  CHECK((t.grad(leaf) - 2.0 * w).norm() < 1e-15);
}

TEST_CASE("backward: zero loss yields zero gradients") {
  const auto g = fixtures::random_graph(2, 9);
  const GraphBatch batch = make_batch(g);
  PolicyParameters p = init_params(LayerKind::GCN, 8, 5);

  Tape t;
  const auto vars = register_params(t, p);
  const int e = embed(t, batch, p, vars);
  const int q = policy_head(t, e, batch, p, vars, HeadMode::QValues);
  const int loss = scale(t, sum_all(t, q), 0.0);
  t.backward(loss);
  for (const auto& [name, var] : vars) {
    if (t.has_grad(var)) CHECK(t.grad(var).norm() == 0.0);
  }
}

TEST_CASE("analytic gradients match finite differences on both layer kinds") {
  for (const LayerKind kind : {LayerKind::GCN, LayerKind::GGNN}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto g = fixtures::random_graph(seed + 7, 10 + 5 * seed);
      const GraphBatch batch = make_batch(g);
      const PolicyParameters p = init_params(kind, 8, seed + 50);
      CHECK(gradcheck::max_relative_error(batch, p, gradcheck::LossKind::SumQ) <
            1e-4);
      CHECK(gradcheck::max_relative_error(
                batch, p, gradcheck::LossKind::PolicyEntropy) < 1e-4);
    }
  }
}

TEST_CASE("dropout behaves per mode and rate") {
  auto rng = substream(9, "dropout");
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(100, 10, 1.0);

  SUBCASE("rate 0 is identity") {
    CHECK((dropout(x, 0.0, true, rng) - x).norm() == 0.0);
  }
  SUBCASE("inference mode is identity at any rate") {
    CHECK((dropout(x, 0.9, false, rng) - x).norm() == 0.0);
  }
  SUBCASE("rate 0.9 keeps about 10% of entries, rescaled") {
    const Eigen::MatrixXd big = Eigen::MatrixXd::Constant(1000, 100, 1.0);
    const Eigen::MatrixXd y = dropout(big, 0.9, true, rng);
    const double survivors =
        (y.array() != 0.0).cast<double>().sum() / (1000.0 * 100.0);
    CHECK(survivors == doctest::Approx(0.1).epsilon(0.1));
    // survivors are scaled by 1/(1-rate)
    CHECK(y.maxCoeff() == doctest::Approx(10.0));
  }
  SUBCASE("bad rate throws") {
    CHECK_THROWS_AS(dropout(x, 1.0, true, rng), std::invalid_argument);
  }
}

TEST_CASE("adam_step basics") {
  PolicyParameters p = init_params(LayerKind::GCN, 8, 1);
  const PolicyParameters before = p;
  AdamState state;

  SUBCASE("zero gradient leaves parameters unchanged") {
    std::map<std::string, Eigen::MatrixXd> grads;
    adam_step(p, grads, state, {1e-2});
    for (const auto& [name, tensor] : p.tensors) {
      CHECK((tensor - before.at(name)).norm() == 0.0);
    }
  }

  SUBCASE("constant gradient moves parameters against its sign") {
    std::map<std::string, Eigen::MatrixXd> grads;
    for (const auto& [name, tensor] : p.tensors) {
      grads[name] = Eigen::MatrixXd::Constant(tensor.rows(), tensor.cols(), 0.5);
    }
    for (int i = 0; i < 50; ++i) adam_step(p, grads, state, {1e-2});
    for (const auto& [name, tensor] : p.tensors) {
      CHECK(((before.at(name) - tensor).array() > 0.0).all());
    }
  }

  SUBCASE("per-step movement is bounded by roughly the learning rate") {
    std::map<std::string, Eigen::MatrixXd> grads;
    auto rng = substream(4, "grads");
    std::normal_distribution<double> n(0.0, 3.0);
    for (const auto& [name, tensor] : p.tensors) {
      grads[name] = Eigen::MatrixXd::Zero(tensor.rows(), tensor.cols());
      for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
        for (Eigen::Index c = 0; c < tensor.cols(); ++c) grads[name](r, c) = n(rng);
      }
    }
    const AdamConfig cfg{1e-2};
    PolicyParameters prev = p;
    for (int i = 0; i < 5; ++i) {
      adam_step(p, grads, state, cfg);
      for (const auto& [name, tensor] : p.tensors) {
        const double biggest =
            (tensor - prev.at(name)).array().abs().maxCoeff();
        // bias-corrected Adam steps at most ~lr per coordinate
        CHECK(biggest <= cfg.learning_rate * (1.0 + 1e-6));
      }
      prev = p;
    }
  }
}

TEST_CASE("the same parameters evaluate graphs of any size") {
  const PolicyParameters gcn = init_params(LayerKind::GCN, 16, 77);
  const PolicyParameters ggnn = init_params(LayerKind::GGNN, 16, 78);
  for (const int n : {2, 10, 100, 2000}) {
    const auto g = fixtures::random_graph(n, n);
    const GraphBatch batch = make_batch(g);
    const Eigen::VectorXd q1 = forward_scores(batch, gcn, HeadMode::QValues);
    const Eigen::VectorXd q2 = forward_scores(batch, ggnn, HeadMode::QValues);
    CHECK(q1.size() == static_cast<int>(g.frontier_nodes.size()));
    CHECK(q2.size() == static_cast<int>(g.frontier_nodes.size()));
    CHECK(q1.allFinite());
    CHECK(q2.allFinite());
  }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  for (const LayerKind kind : {LayerKind::GCN, LayerKind::GGNN}) {
    const PolicyParameters p = init_params(kind, 16, 31);
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    save_checkpoint(p, ss);
    const PolicyParameters q = load_checkpoint(ss);

    CHECK(q.kind == p.kind);
    CHECK(q.hidden == p.hidden);
    CHECK(q.propagation_steps == p.propagation_steps);
    REQUIRE(q.tensors.size() == p.tensors.size());
    for (const auto& [name, tensor] : p.tensors) {
      REQUIRE(q.tensors.count(name) == 1);
      CHECK((q.at(name) - tensor).norm() == 0.0);
    }

    // forward after reload is bit-identical
    const auto g = fixtures::random_graph(1, 14);
    const GraphBatch batch = make_batch(g);
    const Eigen::VectorXd a = forward_scores(batch, p, HeadMode::QValues);
    const Eigen::VectorXd b = forward_scores(batch, q, HeadMode::QValues);
    CHECK((a - b).norm() == 0.0);
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  ss << "NOTACKPT";
  CHECK_THROWS_AS(load_checkpoint(ss), std::runtime_error);
}
