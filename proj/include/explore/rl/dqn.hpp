#pragma once

#include <random>

#include "explore/gnn/adam.hpp"
#include "explore/gnn/network.hpp"
#include "explore/rl/config.hpp"
#include "explore/rl/replay.hpp"

namespace explore::rl {

/// One stochastic forward pass with dropout on the embeddings entering the
/// MLP head; returns the argmax frontier-list index. Rate 0 is greedy.
int action_sampling(const ExplorationGraph& graph,
                    const gnn::PolicyParameters& params, double dropout_rate,
                    std::mt19937_64& rng);

/// Minibatch TD update per the one-step DQN loss with a frozen target
/// network; terminal samples drop the bootstrap term. Returns the loss.
double dqn_update(const ReplayBuffer& buffer, gnn::PolicyParameters& params,
                  const gnn::PolicyParameters& target_params,
                  gnn::AdamState& opt, const TrainConfig& cfg,
                  std::mt19937_64& rng);

/// Owns the online/target pair and the target-sync schedule.
struct DqnTrainer {
  gnn::PolicyParameters params;
  gnn::PolicyParameters target_params;
  gnn::AdamState opt;
  TrainConfig cfg;
  long updates = 0;

  DqnTrainer(gnn::PolicyParameters initial, TrainConfig config)
      : params(std::move(initial)), target_params(params), cfg(std::move(config)) {}

  double update(const ReplayBuffer& buffer, std::mt19937_64& rng);
};

}  // namespace explore::rl
