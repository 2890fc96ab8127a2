#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "explore/rl/a2c.hpp"
#include "explore/rl/dqn.hpp"
#include "explore/rl/reward.hpp"
#include "explore/rl/train.hpp"
#include "graph_fixtures.hpp"

using namespace explore;
using namespace explore::rl;
using gnn::GraphBatch;
using gnn::HeadMode;
using gnn::LayerKind;
using gnn::PolicyParameters;

namespace {

EpisodeParams small_world(std::uint64_t seed = 0) {
  EpisodeParams p;
  p.world.width = 20.0;
  p.world.height = 20.0;
  p.world.landmark_density = 0.02;
  p.world.seed = seed;
  return p;
}

// 2-node fixture graph with a single frontier, used by the TD tests
ExplorationGraph tiny_graph() {
  ExplorationGraph g;
  GraphNode pose;
  pose.kind = NodeKind::Pose;
  pose.position = {0.0, 0.0};
  pose.feature << 2.0, 0.0, 0.0, 0.5, 0.0;
  GraphNode front;
  front.kind = NodeKind::Frontier;
  front.position = {3.0, 0.0};
  front.feature << 2.0, 3.0, 0.0, 0.5, 1.0;
  g.nodes = {pose, front};
  g.edges = {{0, 1, 3.0}};
  g.current_pose_node = 0;
  g.frontier_nodes = {1};
  return g;
}

double q_of(const ExplorationGraph& g, const PolicyParameters& p, int action) {
  return gnn::forward_scores(gnn::make_batch(g), p, HeadMode::QValues)(action);
}

}  // namespace

TEST_CASE("raw reward formula: zero gain, 4m path, alpha 1 gives -4") {
  CHECK(raw_reward_value(800.0, {800.0, 4.0}, 1.0) == -4.0);
}

TEST_CASE("raw reward is strictly monotone in travel cost at equal gain") {
  const double u = 750.0;
  CHECK(raw_reward_value(u, {700.0, 2.0}, 0.05) >
        raw_reward_value(u, {700.0, 5.0}, 0.05));
}

TEST_CASE("raw_rewards matches the candidate-simulation recomposition") {
  Episode ep(small_world(4), 4);
  REQUIRE(!ep.done());
  const double alpha = 1.0;
  const std::vector<double> raws = raw_rewards(ep, alpha);
  REQUIRE(raws.size() == ep.frontiers().size());
  for (std::size_t i = 0; i < raws.size(); ++i) {
    const CandidateOutcome out = simulate_candidate(
        ep.virtual_map(), ep.estimate(), ep.current_pose_covariance(),
        ep.frontiers()[i].position, ep.params().world);
    const double expected = utility(ep.virtual_map()) - out.predicted_utility -
                            alpha * out.travel_cost;
    CHECK(raws[i] == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("reward normalization follows the nearest-frontier projection") {
  const std::vector<double> raws = {2.0, 4.0, 6.0};

  SUBCASE("max is not the nearest frontier") {
    // nearest has raw 2 (index 0); chosen middle candidate
    CHECK(reward_from_raw(raws, 1, 0) == doctest::Approx(0.0));
    CHECK(reward_from_raw(raws, 2, 0) == doctest::Approx(1.0));
    CHECK(reward_from_raw(raws, 0, 0) == doctest::Approx(-1.0));
  }

  SUBCASE("max is the nearest frontier") {
    CHECK(reward_from_raw(raws, 2, 2) == doctest::Approx(0.0));
    CHECK(reward_from_raw(raws, 0, 2) == doctest::Approx(-1.0));
    CHECK(reward_from_raw(raws, 1, 2) == doctest::Approx(-0.5));
  }

  SUBCASE("degenerate all-equal case normalizes to 0 pre-projection") {
    const std::vector<double> flat = {5.0, 5.0};
    CHECK(reward_from_raw(flat, 0, 0) == doctest::Approx(-1.0));
    const std::vector<double> single = {5.0};
    CHECK(reward_from_raw(single, 0, 0) == doctest::Approx(-1.0));
  }
}

TEST_CASE("reward contract over fuzzed episode states") {
  int branch_near = 0;
  int branch_far = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Episode ep(small_world(seed), seed + 100);
    auto rng = substream(seed, "fuzz");
    while (!ep.done()) {
      const std::vector<double> raws = raw_rewards(ep, 0.05);
      const int nearest = nearest_frontier(
          ep.estimate().poses.back().position(), ep.frontiers());
      const double hi = *std::max_element(raws.begin(), raws.end());
      const bool near_branch = raws[nearest] == hi;
      (near_branch ? branch_near : branch_far)++;

      int best_raw = 0;
      int best_reward = 0;
      for (int i = 0; i < static_cast<int>(raws.size()); ++i) {
        const double r = reward_from_raw(raws, i, nearest);
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
        if (near_branch) CHECK(r <= 0.0);
        if (raws[i] > raws[best_raw]) best_raw = i;
        if (r > reward_from_raw(raws, best_reward, nearest)) best_reward = i;
      }
      // monotone normalization preserves the argmax
      CHECK(reward_from_raw(raws, best_raw, nearest) ==
            reward_from_raw(raws, best_reward, nearest));

      std::uniform_int_distribution<int> pick(
          0, static_cast<int>(raws.size()) - 1);
      ep.execute_frontier_node(ep.graph().frontier_nodes[pick(rng)]);
    }
  }
  CHECK(branch_near > 0);
  CHECK(branch_far > 0);
}

TEST_CASE("action_sampling is greedy at rate 0 and stochastic at 0.9") {
  const auto g = fixtures::random_graph(12, 18);
  REQUIRE(g.frontier_nodes.size() >= 2);
  const PolicyParameters p = gnn::init_params(LayerKind::GCN, 16, 9);
  auto rng = substream(5, "actions");

  const int first = action_sampling(g, p, 0.0, rng);
  for (int k = 0; k < 100; ++k) {
    CHECK(action_sampling(g, p, 0.0, rng) == first);
  }

  std::map<int, int> histogram;
  for (int k = 0; k < 1000; ++k) {
    histogram[action_sampling(g, p, 0.9, rng)]++;
  }
  CHECK(histogram.size() >= 2);  // dropout explores multiple frontiers
}

TEST_CASE("action_sampling on a single frontier always picks it") {
  const auto g = tiny_graph();
  const PolicyParameters p = gnn::init_params(LayerKind::GCN, 8, 3);
  auto rng = substream(6, "actions");
  for (int k = 0; k < 20; ++k) {
    CHECK(action_sampling(g, p, 0.9, rng) == 0);
  }
}

TEST_CASE("dqn_update loss matches the hand-computed TD error") {
  const auto g1 = fixtures::random_graph(31, 12);
  const auto g2 = fixtures::random_graph(32, 14);
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.gamma = 0.5;

  PolicyParameters params = gnn::init_params(LayerKind::GCN, 8, 60);
  const PolicyParameters target = gnn::init_params(LayerKind::GCN, 8, 61);
  const PolicyParameters before = params;

  ReplayBuffer buffer(10);
  buffer.push({g1, 0, 0.25, g2, false});
  buffer.push({g2, 1, -0.5, g1, true});

  // hand evaluation of the one-step TD targets over the full 2-element batch
  const double q1 = q_of(g1, before, 0);
  const double q2 = q_of(g2, before, 1);
  const Eigen::VectorXd q_next =
      gnn::forward_scores(gnn::make_batch(g2), target, HeadMode::QValues);
  const double target1 = 0.25 + cfg.gamma * q_next.maxCoeff();
  const double target2 = -0.5;  // terminal drops the bootstrap
  const double expected =
      0.5 * ((target1 - q1) * (target1 - q1) + (target2 - q2) * (target2 - q2));

  gnn::AdamState opt;
  auto rng = substream(1, "update");
  const double loss = dqn_update(buffer, params, target, opt, cfg, rng);
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));

  double delta = 0.0;
  for (const auto& [name, tensor] : params.tensors) {
    delta += (tensor - before.at(name)).norm();
  }
  CHECK(delta > 0.0);
}

TEST_CASE("terminal sample with Q equal to the reward contributes zero loss") {
  const auto g = tiny_graph();
  PolicyParameters params = gnn::init_params(LayerKind::GCN, 8, 62);
  const double q = q_of(g, params, 0);
  REQUIRE(std::abs(q) <= 1.0);

  TrainConfig cfg;
  cfg.batch_size = 1;
  ReplayBuffer buffer(4);
  buffer.push({g, 0, q, g, true});

  gnn::AdamState opt;
  auto rng = substream(2, "update");
  const double loss = dqn_update(buffer, params, params, opt, cfg, rng);
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("gamma 0 reduces DQN to regression on the reward") {
  const auto g = fixtures::random_graph(33, 10);
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.gamma = 0.0;

  PolicyParameters params = gnn::init_params(LayerKind::GGNN, 8, 63);
  const double q = q_of(g, params, 0);

  ReplayBuffer buffer(4);
  buffer.push({g, 0, 0.75, g, false});
  gnn::AdamState opt;
  auto rng = substream(3, "update");
  const double loss = dqn_update(buffer, params, params, opt, cfg, rng);
  CHECK(loss == doctest::Approx((0.75 - q) * (0.75 - q)).epsilon(1e-12));
}

TEST_CASE("DQN fixed point: r=1, gamma=0.5 drives Q to 2") {
  const auto g = tiny_graph();
  TrainConfig cfg;
  cfg.gamma = 0.5;
  cfg.batch_size = 4;
  cfg.learning_rate = 0.01;
  cfg.target_sync_interval = 50;

  DqnTrainer trainer(gnn::init_params(LayerKind::GCN, 8, 64), cfg);
  ReplayBuffer buffer(16);
  for (int i = 0; i < 16; ++i) buffer.push({g, 0, 1.0, g, false});

  auto rng = substream(4, "update");
  for (int step = 0; step < 2000; ++step) trainer.update(buffer, rng);
  CHECK(q_of(g, trainer.params, 0) == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("replay sampling is uniform and without replacement") {
  ReplayBuffer buffer(100);
  const auto g = tiny_graph();
  for (int i = 0; i < 100; ++i) buffer.push({g, 0, 0.0, g, false});

  auto rng = substream(7, "replay");

  SUBCASE("minibatch indices are distinct") {
    for (int k = 0; k < 50; ++k) {
      const auto idx = buffer.sample_indices(32, rng);
      std::set<std::size_t> unique(idx.begin(), idx.end());
      CHECK(unique.size() == idx.size());
    }
  }

  SUBCASE("per-element frequency within 3 sd of uniform over 1e5 draws") {
    std::vector<int> counts(100, 0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
      counts[buffer.sample_indices(1, rng)[0]]++;
    }
    const double expected = draws / 100.0;
    const double sd = std::sqrt(draws * 0.01 * 0.99);
    for (int c : counts) {
      CHECK(std::abs(c - expected) <= 3.0 * sd);
    }
  }

  SUBCASE("FIFO eviction respects capacity") {
    ReplayBuffer small(3);
    for (int i = 0; i < 5; ++i) {
      small.push({g, 0, i * 0.1, g, false});
    }
    CHECK(small.size() == 3);
    CHECK(small.at(0).reward == doctest::Approx(0.2));
  }
}

TEST_CASE("a2c_update loss matches scalar hand-evaluation") {
  const auto g1 = fixtures::random_graph(41, 12);
  const auto g2 = fixtures::random_graph(42, 12);
  TrainConfig cfg;
  cfg.gamma = 0.9;
  cfg.beta = 0.5;
  cfg.eta = 0.01;

  PolicyParameters policy = gnn::init_params(LayerKind::GGNN, 8, 70);
  PolicyParameters value = gnn::init_params(LayerKind::GGNN, 8, 71);
  const PolicyParameters policy0 = policy;
  const PolicyParameters value0 = value;

  std::vector<TransitionSample> rollout = {{g1, 1, 0.3, g2, false}};

  // hand evaluation with the pre-update networks
  const Eigen::VectorXd probs =
      gnn::forward_scores(gnn::make_batch(g1), policy0, HeadMode::Softmax);
  const double v_next =
      gnn::forward_scores(gnn::make_batch(g2), value0, HeadMode::QValues)
          .maxCoeff();
  const double v_now =
      gnn::forward_scores(gnn::make_batch(g1), value0, HeadMode::QValues)
          .maxCoeff();
  const double ret = 0.3 + cfg.gamma * v_next;
  const double advantage = ret - v_now;
  double entropy_term = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    entropy_term += probs(i) * std::log(probs(i));
  }
  const double expected = -advantage * std::log(probs(1)) +
                          cfg.beta * advantage * advantage +
                          cfg.eta * entropy_term;

  gnn::AdamState popt, vopt;
  auto rng = substream(8, "update");
  const A2cLoss loss = a2c_update(rollout, policy, value, popt, vopt, cfg, rng);
  CHECK(loss.total == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss.policy_term ==
        doctest::Approx(-advantage * std::log(probs(1))).epsilon(1e-12));
  CHECK(loss.value_term == doctest::Approx(advantage * advantage).epsilon(1e-12));
  CHECK(loss.entropy_term == doctest::Approx(entropy_term).epsilon(1e-12));
}

TEST_CASE("uniform policy over 4 symmetric frontiers has entropy term -ln 4") {
  ExplorationGraph g;
  GraphNode pose;
  pose.kind = NodeKind::Pose;
  pose.position = {0.0, 0.0};
  pose.feature << 2.0, 0.0, 0.0, 0.5, 0.0;
  g.nodes.push_back(pose);
  g.current_pose_node = 0;
  for (int i = 0; i < 4; ++i) {
    GraphNode f;
    f.kind = NodeKind::Frontier;
    f.position = {2.0, 0.0};
    f.feature << 2.0, 2.0, 0.0, 0.5, 1.0;
    g.frontier_nodes.push_back(g.size());
    g.nodes.push_back(f);
    g.edges.push_back({0, g.size() - 1, 2.0});
  }

  const PolicyParameters policy = gnn::init_params(LayerKind::GGNN, 8, 72);
  const Eigen::VectorXd probs =
      gnn::forward_scores(gnn::make_batch(g), policy, HeadMode::Softmax);
  double entropy_term = 0.0;
  for (int i = 0; i < 4; ++i) {
    CHECK(probs(i) == doctest::Approx(0.25).epsilon(1e-12));
    entropy_term += probs(i) * std::log(probs(i));
  }
  CHECK(entropy_term == doctest::Approx(-std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("entropy pressure on a near-deterministic policy") {
  using namespace explore::gnn;
  const auto g = fixtures::random_graph(44, 16);
  REQUIRE(g.frontier_nodes.size() >= 2);
  const GraphBatch batch = make_batch(g);
  PolicyParameters policy = init_params(LayerKind::GCN, 8, 73);
  policy.tensors["head.w1"] *= 25.0;  // sharpen toward one-hot

  auto entropy_term_value = [&](const PolicyParameters& p) {
    Tape t;
    const auto vars = register_params(t, p);
    const int e = embed(t, batch, p, vars);
    const int scores = policy_head(t, e, batch, p, vars, HeadMode::QValues);
    const int logp = log_softmax_col(t, scores);
    return t.value(sum_all(t, cmul(t, exp_op(t, logp), logp)))(0, 0);
  };

  Tape t;
  const auto vars = register_params(t, policy);
  const int e = embed(t, batch, policy, vars);
  const int scores = policy_head(t, e, batch, policy, vars, HeadMode::QValues);
  const int logp = log_softmax_col(t, scores);
  const int loss = sum_all(t, cmul(t, exp_op(t, logp), logp));
  t.backward(loss);

  // finite-difference check of the entropy-term gradient on the head
  const double eps = 1e-5;
  for (const std::string name : {"head.w1", "head.b1"}) {
    for (Eigen::Index r = 0; r < policy.at(name).rows(); ++r) {
      PolicyParameters plus = policy;
      PolicyParameters minus = policy;
      plus.tensors[name](r, 0) += eps;
      minus.tensors[name](r, 0) -= eps;
      const double numeric =
          (entropy_term_value(plus) - entropy_term_value(minus)) / (2.0 * eps);
      const double analytic = t.grad(vars.at(name))(r, 0);
      CHECK(std::abs(analytic - numeric) <=
            1e-4 * std::max({1.0, std::abs(analytic), std::abs(numeric)}));
    }
  }

  // a small step against the entropy-term gradient strictly raises entropy
  auto entropy_of = [&](const PolicyParameters& p) {
    const Eigen::VectorXd pr = forward_scores(batch, p, HeadMode::Softmax);
    double h = 0.0;
    for (int i = 0; i < pr.size(); ++i) {
      if (pr(i) > 0.0) h -= pr(i) * std::log(pr(i));
    }
    return h;
  };
  const double before = entropy_of(policy);
  PolicyParameters stepped = policy;
  for (const auto& [name, var] : vars) {
    if (t.has_grad(var)) stepped.tensors[name] -= 1e-4 * t.grad(var);
  }
  CHECK(entropy_of(stepped) > before);
}

TEST_CASE("train with zero steps returns the initial parameters") {
  TrainConfig cfg;
  cfg.max_training_steps = 0;
  const TrainResult result =
      train(small_world(1), cfg, Algorithm::DQN, LayerKind::GCN, 5);
  const PolicyParameters fresh = gnn::init_params(
      LayerKind::GCN, cfg.hidden_width, substream_seed(5, "init"));
  for (const auto& [name, tensor] : fresh.tensors) {
    CHECK((result.params.at(name) - tensor).norm() == 0.0);
  }
  CHECK(result.total_decisions == 0);
}

TEST_CASE("short smoke training runs complete and log rewards") {
  TrainConfig cfg;
  cfg.max_training_steps = 30;
  cfg.batch_size = 8;
  cfg.policy_update_steps = 8;

  SUBCASE("dqn") {
    const TrainResult result =
        train(small_world(2), cfg, Algorithm::DQN, LayerKind::GCN, 6);
    CHECK(result.total_decisions == 30);
    CHECK(!result.episodes.empty());
    for (const auto& row : result.episodes) {
      CHECK(row.mean_reward >= -1.0);
      CHECK(row.mean_reward <= 1.0);
    }
  }

  SUBCASE("a2c") {
    const TrainResult result =
        train(small_world(2), cfg, Algorithm::A2C, LayerKind::GGNN, 7);
    CHECK(result.total_decisions == 30);
    CHECK(result.value_params.has_value());
  }
}
