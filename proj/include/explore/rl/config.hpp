#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace explore::rl {

enum class Algorithm { DQN, A2C };

struct TrainConfig {
  double gamma = 0.99;     // discount
  double alpha = 0.05;     // cost-to-go weight, 1/m
  double beta = 0.5;       // value-loss coefficient
  double eta = 0.01;       // entropy coefficient
  double learning_rate = 1e-3;
  int batch_size = 32;
  int target_sync_interval = 500;  // updates between target copies
  int policy_update_steps = 16;    // A2C rollout length
  double dropout_start = 0.9;      // action-sampling dropout, decayed linearly
  double dropout_end = 0.0;
  double layer_dropout = 0.0;  // between GNN layers during update passes
  long max_training_steps = 20000;
  std::size_t buffer_capacity = 10000;
  int hidden_width = 32;
  int checkpoint_every_episodes = 200;

  void validate() const {
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("train: gamma in [0,1)");
    if (eta < 0.0) throw std::invalid_argument("train: eta must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size >= 1");
    if (policy_update_steps < 1) {
      throw std::invalid_argument("train: policy_update_steps >= 1");
    }
    if (dropout_start < 0.0 || dropout_start >= 1.0 || dropout_end < 0.0 ||
        dropout_end >= 1.0) {
      throw std::invalid_argument("train: dropout rates in [0,1)");
    }
  }

  /// Linear decay from dropout_start to dropout_end over max_training_steps.
  double dropout_rate_at(long step) const {
    if (max_training_steps <= 0) return dropout_end;
    const double f =
        std::min(1.0, static_cast<double>(step) / static_cast<double>(max_training_steps));
    return dropout_start + f * (dropout_end - dropout_start);
  }
};

}  // namespace explore::rl
