#include <doctest.h>

#include <map>

#include "explore/baselines.hpp"
#include "explore/rl/reward.hpp"
#include "graph_fixtures.hpp"

using namespace explore;

namespace {

EpisodeParams small_world(std::uint64_t seed = 0) {
  EpisodeParams p;
  p.world.width = 20.0;
  p.world.height = 20.0;
  p.world.landmark_density = 0.02;
  p.world.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("policy kind parsing") {
  CHECK(PolicyKind::parse("nearest").tag == PolicyKind::Tag::Nearest);
  CHECK(PolicyKind::parse("random").tag == PolicyKind::Tag::Random);
  CHECK(PolicyKind::parse("em").tag == PolicyKind::Tag::Em);
  const PolicyKind learned = PolicyKind::parse("learned:/tmp/x.ckpt");
  CHECK(learned.tag == PolicyKind::Tag::Learned);
  CHECK(learned.checkpoint == "/tmp/x.ckpt");
  CHECK_THROWS_AS(PolicyKind::parse("magic"), std::invalid_argument);
  CHECK_THROWS_AS(PolicyKind::parse("learned:"), std::invalid_argument);
}

TEST_CASE("nearest_policy picks the closest frontier, ties to lowest index") {
  ExplorationGraph g;
  GraphNode pose;
  pose.kind = NodeKind::Pose;
  pose.position = {0.0, 0.0};
  g.nodes.push_back(pose);
  g.current_pose_node = 0;
  auto add_frontier = [&](double x, double y) {
    GraphNode f;
    f.kind = NodeKind::Frontier;
    f.position = {x, y};
    g.frontier_nodes.push_back(g.size());
    g.nodes.push_back(f);
  };

  SUBCASE("single frontier") {
    add_frontier(7.0, 0.0);
    CHECK(nearest_policy(g) == 0);
  }
  SUBCASE("2m beats 7m") {
    add_frontier(7.0, 0.0);
    add_frontier(2.0, 0.0);
    CHECK(nearest_policy(g) == 1);
  }
  SUBCASE("tie goes to the lowest index") {
    add_frontier(0.0, 3.0);
    add_frontier(3.0, 0.0);
    CHECK(nearest_policy(g) == 0);
  }
}

TEST_CASE("random_policy is uniform and seeded-reproducible") {
  const auto g = fixtures::random_graph(9, 25);
  const int f = static_cast<int>(g.frontier_nodes.size());
  REQUIRE(f == 4);

  auto rng = substream(12, "policy");
  std::map<int, int> histogram;
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) histogram[random_policy(g, rng)]++;
  for (const auto& [idx, count] : histogram) {
    CHECK(idx >= 0);
    CHECK(idx < f);
    CHECK(static_cast<double>(count) / draws ==
          doctest::Approx(0.25).epsilon(0.08));
  }

  auto rng_a = substream(33, "policy");
  auto rng_b = substream(33, "policy");
  for (int k = 0; k < 100; ++k) {
    CHECK(random_policy(g, rng_a) == random_policy(g, rng_b));
  }
}

TEST_CASE("em_policy equals brute-force argmax of recomputed raw rewards") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Episode ep(small_world(seed), seed + 50);
    auto rng = substream(seed, "roll");
    int steps = 0;
    while (!ep.done() && steps < 4) {
      const double alpha = 0.05;
      const int chosen = em_policy(ep, alpha);

      // independent recomputation straight from candidate simulation
      int best = 0;
      double best_raw = -1e300;
      for (int i = 0; i < static_cast<int>(ep.frontiers().size()); ++i) {
        const CandidateOutcome out = simulate_candidate(
            ep.virtual_map(), ep.estimate(), ep.current_pose_covariance(),
            ep.frontiers()[i].position, ep.params().world);
        const double raw = utility(ep.virtual_map()) - out.predicted_utility -
                           alpha * out.travel_cost;
        if (raw > best_raw) {
          best_raw = raw;
          best = i;
        }
      }
      CHECK(chosen == best);

      std::uniform_int_distribution<int> pick(
          0, static_cast<int>(ep.frontiers().size()) - 1);
      ep.execute_frontier_node(ep.graph().frontier_nodes[pick(rng)]);
      ++steps;
    }
  }
}

TEST_CASE("all policies return valid frontier indices on reachable states") {
  auto rng = substream(77, "fuzz");
  int states = 0;
  for (std::uint64_t seed = 0; seed < 5 && states < 60; ++seed) {
    Episode ep(small_world(seed + 20), seed + 200);
    while (!ep.done() && states < 60) {
      const int f = static_cast<int>(ep.frontiers().size());
      const int a = nearest_policy(ep.graph());
      const int b = random_policy(ep.graph(), rng);
      const int c = em_policy(ep, 0.05);
      for (int idx : {a, b, c}) {
        CHECK(idx >= 0);
        CHECK(idx < f);
      }
      ++states;
      ep.execute_frontier_node(ep.graph().frontier_nodes[b]);
    }
  }
  CHECK(states > 0);
}
