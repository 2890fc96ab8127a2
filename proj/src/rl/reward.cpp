#include "explore/rl/reward.hpp"

#include <algorithm>
#include <stdexcept>

namespace explore::rl {

double raw_reward(const Episode& ep, int frontier_index, double alpha) {
  const auto& frontiers = ep.frontiers();
  if (frontier_index < 0 || frontier_index >= static_cast<int>(frontiers.size())) {
    throw std::invalid_argument("raw_reward: frontier index out of range");
  }
  const CandidateOutcome out = simulate_candidate(
      ep.virtual_map(), ep.estimate(), ep.current_pose_covariance(),
      frontiers[frontier_index].position, ep.params().world);
  return raw_reward_value(utility(ep.virtual_map()), out, alpha);
}

std::vector<double> raw_rewards(const Episode& ep, double alpha) {
  std::vector<double> raws(ep.frontiers().size());
  for (int i = 0; i < static_cast<int>(raws.size()); ++i) {
    raws[i] = raw_reward(ep, i, alpha);
  }
  return raws;
}

double reward_from_raw(const std::vector<double>& raws, int chosen,
                       int nearest_index) {
  if (raws.empty()) throw std::invalid_argument("reward: no candidates");
  if (chosen < 0 || chosen >= static_cast<int>(raws.size())) {
    throw std::invalid_argument("reward: chosen index out of range");
  }
  const double lo = *std::min_element(raws.begin(), raws.end());
  const double hi = *std::max_element(raws.begin(), raws.end());
  const double r = (hi > lo) ? (raws[chosen] - lo) / (hi - lo) : 0.0;
  if (raws[nearest_index] == hi) {
    return r - 1.0;  // in [-1, 0]
  }
  return 2.0 * r - 1.0;  // in [-1, 1]
}

double reward(const Episode& ep, int frontier_index, double alpha) {
  const std::vector<double> raws = raw_rewards(ep, alpha);
  const int nearest =
      nearest_frontier(ep.estimate().poses.back().position(), ep.frontiers());
  return reward_from_raw(raws, frontier_index, nearest);
}

}  // namespace explore::rl
