#pragma once

#include <optional>
#include <random>
#include <string>

#include "explore/episode.hpp"
#include "explore/gnn/network.hpp"

namespace explore {

/// Decision policy selected on the command line: non-learned comparison
/// baselines or a learned network loaded from a checkpoint.
struct PolicyKind {
  enum class Tag { Nearest, Random, Em, Learned } tag = Tag::Nearest;
  std::string checkpoint;  // Learned only

  /// Accepts "nearest", "random", "em", "learned:<checkpoint path>".
  static PolicyKind parse(const std::string& text);
  std::string name() const;
};

/// Frontier-list index of the frontier nearest the current pose.
int nearest_policy(const ExplorationGraph& graph);

/// Uniform over frontier nodes.
int random_policy(const ExplorationGraph& graph, std::mt19937_64& rng);

/// EM forward simulation: evaluate the raw reward of every frontier through
/// virtual-map candidate simulation and take the argmax (ties to the lowest
/// index). Cost weighting is `alpha`, shared with the RL reward.
int em_policy(const Episode& episode, double alpha);

}  // namespace explore
