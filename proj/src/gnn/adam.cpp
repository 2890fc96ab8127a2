#include "explore/gnn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace explore::gnn {

void adam_step(PolicyParameters& params,
               const std::map<std::string, Eigen::MatrixXd>& grads,
               AdamState& state, const AdamConfig& cfg) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);

  for (auto& [name, w] : params.tensors) {
    auto it = grads.find(name);
    const Eigen::MatrixXd g = (it != grads.end() && it->second.size() > 0)
                                  ? it->second
                                  : Eigen::MatrixXd::Zero(w.rows(), w.cols());
    if (g.rows() != w.rows() || g.cols() != w.cols()) {
      throw std::invalid_argument("adam_step: gradient shape mismatch for " + name);
    }
    auto& m = state.m.try_emplace(name, Eigen::MatrixXd::Zero(w.rows(), w.cols()))
                  .first->second;
    auto& v = state.v.try_emplace(name, Eigen::MatrixXd::Zero(w.rows(), w.cols()))
                  .first->second;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const Eigen::MatrixXd m_hat = m / bc1;
    const Eigen::MatrixXd v_hat = v / bc2;
    w.array() -=
        cfg.learning_rate * m_hat.array() / (v_hat.array().sqrt() + cfg.epsilon);
  }
}

}  // namespace explore::gnn
