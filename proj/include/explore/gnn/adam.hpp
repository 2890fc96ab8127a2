#pragma once

#include <map>
#include <string>

#include "explore/gnn/network.hpp"

namespace explore::gnn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::map<std::string, Eigen::MatrixXd> m;
  std::map<std::string, Eigen::MatrixXd> v;
  long step = 0;
};

/// One bias-corrected adaptive-moment update. Missing gradient entries are
/// treated as zero; shapes must match the parameter tensors.
void adam_step(PolicyParameters& params,
               const std::map<std::string, Eigen::MatrixXd>& grads,
               AdamState& state, const AdamConfig& cfg = {});

}  // namespace explore::gnn
