#include "explore/baselines.hpp"

#include <stdexcept>

#include "explore/rl/reward.hpp"

namespace explore {

PolicyKind PolicyKind::parse(const std::string& text) {
  if (text == "nearest") return {Tag::Nearest, {}};
  if (text == "random") return {Tag::Random, {}};
  if (text == "em") return {Tag::Em, {}};
  const std::string prefix = "learned:";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size()) {
    return {Tag::Learned, text.substr(prefix.size())};
  }
  throw std::invalid_argument(
      "policy must be nearest | random | em | learned:<checkpoint>, got '" +
      text + "'");
}

std::string PolicyKind::name() const {
  switch (tag) {
    case Tag::Nearest: return "nearest";
    case Tag::Random: return "random";
    case Tag::Em: return "em";
    case Tag::Learned: return "learned";
  }
  return "?";
}

int nearest_policy(const ExplorationGraph& graph) {
  if (graph.frontier_nodes.empty()) {
    throw std::invalid_argument("nearest_policy: no frontiers");
  }
  const Eigen::Vector2d current =
      graph.nodes[graph.current_pose_node].position;
  int best = 0;
  double best_d =
      (graph.nodes[graph.frontier_nodes[0]].position - current).squaredNorm();
  for (int i = 1; i < static_cast<int>(graph.frontier_nodes.size()); ++i) {
    const double d =
        (graph.nodes[graph.frontier_nodes[i]].position - current).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

int random_policy(const ExplorationGraph& graph, std::mt19937_64& rng) {
  if (graph.frontier_nodes.empty()) {
    throw std::invalid_argument("random_policy: no frontiers");
  }
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(graph.frontier_nodes.size()) - 1);
  return pick(rng);
}

int em_policy(const Episode& episode, double alpha) {
  const std::vector<double> raws = rl::raw_rewards(episode, alpha);
  if (raws.empty()) throw std::invalid_argument("em_policy: no frontiers");
  int best = 0;
  for (int i = 1; i < static_cast<int>(raws.size()); ++i) {
    if (raws[i] > raws[best]) best = i;
  }
  return best;
}

}  // namespace explore
