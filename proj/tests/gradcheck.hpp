// Finite-difference gradient verification used by the GNN unit tests and
// acceptance criterion 2. The oracle is plain central differencing of the
// scalar loss; it never touches the tape's backward pass.
#pragma once

#include <map>
#include <string>

#include "explore/gnn/network.hpp"

namespace gradcheck {

using explore::gnn::GraphBatch;
using explore::gnn::HeadMode;
using explore::gnn::PolicyParameters;
using explore::gnn::Tape;

enum class LossKind {
  SumQ,           // sum of frontier q-values
  PolicyEntropy,  // log pi(action) + sum pi log pi
};

inline int build_loss(Tape& t, const GraphBatch& batch,
                      const PolicyParameters& p,
                      const std::map<std::string, int>& vars, LossKind kind,
                      int action) {
  const int e = explore::gnn::embed(t, batch, p, vars);
  if (kind == LossKind::SumQ) {
    const int q = explore::gnn::policy_head(t, e, batch, p, vars, HeadMode::QValues);
    return explore::gnn::sum_all(t, q);
  }
  const int scores =
      explore::gnn::policy_head(t, e, batch, p, vars, HeadMode::QValues);
  const int logp = explore::gnn::log_softmax_col(t, scores);
  const int chosen = explore::gnn::entry(t, logp, action, 0);
  const int probs = explore::gnn::exp_op(t, logp);
  const int entropy = explore::gnn::sum_all(t, explore::gnn::cmul(t, probs, logp));
  return explore::gnn::add(t, chosen, entropy);
}

inline double loss_value(const GraphBatch& batch, const PolicyParameters& p,
                         LossKind kind, int action) {
  Tape t;
  const auto vars = explore::gnn::register_params(t, p);
  return t.value(build_loss(t, batch, p, vars, kind, action))(0, 0);
}

inline std::map<std::string, Eigen::MatrixXd> analytic_gradients(
    const GraphBatch& batch, const PolicyParameters& p, LossKind kind,
    int action) {
  Tape t;
  const auto vars = explore::gnn::register_params(t, p);
  const int loss = build_loss(t, batch, p, vars, kind, action);
  t.backward(loss);
  std::map<std::string, Eigen::MatrixXd> grads;
  for (const auto& [name, var] : vars) {
    grads[name] = t.has_grad(var)
                      ? t.grad(var)
                      : Eigen::MatrixXd::Zero(p.at(name).rows(), p.at(name).cols());
  }
  return grads;
}

/// Largest per-tensor relative Frobenius error between analytic and central
/// finite-difference gradients.
inline double max_relative_error(const GraphBatch& batch,
                                 const PolicyParameters& params, LossKind kind,
                                 int action = 0, double eps = 1e-5) {
  const auto analytic = analytic_gradients(batch, params, kind, action);
  double worst = 0.0;
  for (const auto& [name, tensor] : params.tensors) {
    Eigen::MatrixXd numeric(tensor.rows(), tensor.cols());
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
        PolicyParameters plus = params;
        PolicyParameters minus = params;
        plus.tensors[name](r, c) += eps;
        minus.tensors[name](r, c) -= eps;
        numeric(r, c) = (loss_value(batch, plus, kind, action) -
                         loss_value(batch, minus, kind, action)) /
                        (2.0 * eps);
      }
    }
    const double diff = (analytic.at(name) - numeric).norm();
    const double scale = std::max(numeric.norm(), 1e-10);
    if (diff > 1e-10) worst = std::max(worst, diff / scale);
  }
  return worst;
}

}  // namespace gradcheck
