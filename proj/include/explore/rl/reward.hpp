#pragma once

#include <vector>

#include "explore/episode.hpp"

namespace explore::rl {

/// Utility drop minus travel penalty: U(now) - predicted - alpha * cost.
inline double raw_reward_value(double current_utility,
                               const CandidateOutcome& outcome, double alpha) {
  return current_utility - outcome.predicted_utility - alpha * outcome.travel_cost;
}

/// Utility drop minus travel penalty for visiting one frontier:
/// U(now) - predicted U(after) - alpha * path length. Higher is better.
double raw_reward(const Episode& ep, int frontier_index, double alpha);

/// Raw rewards for every frontier, in FrontierSet order.
std::vector<double> raw_rewards(const Episode& ep, double alpha);

/// Min-max normalized reward projected by the nearest-frontier rule: when
/// the best raw reward belongs to the frontier nearest the robot the result
/// lies in [-1, 0], otherwise in [-1, 1]. All candidates equal normalizes
/// to 0 before projection.
double reward(const Episode& ep, int frontier_index, double alpha);
double reward_from_raw(const std::vector<double>& raws, int chosen,
                       int nearest_index);

}  // namespace explore::rl
