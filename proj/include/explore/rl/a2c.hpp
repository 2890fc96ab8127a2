#pragma once

#include <random>
#include <vector>

#include "explore/gnn/adam.hpp"
#include "explore/gnn/network.hpp"
#include "explore/rl/config.hpp"
#include "explore/rl/replay.hpp"

namespace explore::rl {

/// Sample a frontier-list index from the policy's softmax distribution.
int sample_policy_action(const ExplorationGraph& graph,
                         const gnn::PolicyParameters& policy,
                         std::mt19937_64& rng);

struct A2cLoss {
  double total = 0.0;
  double policy_term = 0.0;
  double value_term = 0.0;
  double entropy_term = 0.0;  // sum_f pi log pi, weighted by eta in total
};

/// Advantage actor-critic update over one rollout: n-step returns
/// bootstrapped by the value of the last next-graph, loss
/// -A log pi + beta (R - V)^2 + eta sum pi log pi, one Adam step for each of
/// the two separate networks.
A2cLoss a2c_update(const std::vector<TransitionSample>& rollout,
                   gnn::PolicyParameters& policy_params,
                   gnn::PolicyParameters& value_params, gnn::AdamState& policy_opt,
                   gnn::AdamState& value_opt, const TrainConfig& cfg,
                   std::mt19937_64& rng);

struct A2cTrainer {
  gnn::PolicyParameters policy_params;
  gnn::PolicyParameters value_params;
  gnn::AdamState policy_opt;
  gnn::AdamState value_opt;
  TrainConfig cfg;

  A2cTrainer(gnn::PolicyParameters policy, gnn::PolicyParameters value,
             TrainConfig config)
      : policy_params(std::move(policy)), value_params(std::move(value)),
        cfg(std::move(config)) {}

  A2cLoss update(const std::vector<TransitionSample>& rollout,
                 std::mt19937_64& rng) {
    return a2c_update(rollout, policy_params, value_params, policy_opt,
                      value_opt, cfg, rng);
  }
};

}  // namespace explore::rl
