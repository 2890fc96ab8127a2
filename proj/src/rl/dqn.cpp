#include "explore/rl/dqn.hpp"

#include <cmath>
#include <stdexcept>

namespace explore::rl {

using namespace explore::gnn;

int action_sampling(const ExplorationGraph& graph, const PolicyParameters& params,
                    double dropout_rate, std::mt19937_64& rng) {
  if (graph.frontier_nodes.empty()) {
    throw std::invalid_argument("action_sampling: graph has no frontiers");
  }
  const GraphBatch batch = make_batch(graph);
  ForwardOptions opts;
  opts.head_dropout = dropout_rate;
  opts.training = dropout_rate > 0.0;
  opts.rng = &rng;
  const Eigen::VectorXd q = forward_scores(batch, params, HeadMode::QValues, opts);
  int arg = 0;
  q.maxCoeff(&arg);
  return arg;
}

double dqn_update(const ReplayBuffer& buffer, PolicyParameters& params,
                  const PolicyParameters& target_params, AdamState& opt,
                  const TrainConfig& cfg, std::mt19937_64& rng) {
  if (buffer.size() < static_cast<std::size_t>(cfg.batch_size)) {
    throw std::invalid_argument("dqn_update: buffer smaller than batch");
  }
  const auto indices = buffer.sample_indices(cfg.batch_size, rng);

  // batches must outlive backward() because spmm captures the adjacency
  std::vector<GraphBatch> batches;
  batches.reserve(indices.size());
  std::vector<double> targets;
  targets.reserve(indices.size());

  for (const auto i : indices) {
    const TransitionSample& s = buffer.at(i);
    double target = s.reward;
    if (!s.terminal && !s.next_graph.frontier_nodes.empty()) {
      const GraphBatch next = make_batch(s.next_graph);
      const Eigen::VectorXd q_next =
          forward_scores(next, target_params, HeadMode::QValues);
      target += cfg.gamma * q_next.maxCoeff();
    }
    targets.push_back(target);
    batches.push_back(make_batch(buffer.at(i).graph));
  }

  Tape tape;
  const auto vars = register_params(tape, params);
  ForwardOptions opts;
  opts.layer_dropout = cfg.layer_dropout;
  opts.training = cfg.layer_dropout > 0.0;
  opts.rng = &rng;

  int loss = -1;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const TransitionSample& s = buffer.at(indices[k]);
    const int e = embed(tape, batches[k], params, vars, opts);
    const int q = policy_head(tape, e, batches[k], params, vars,
                              HeadMode::QValues, opts);
    const int q_a = entry(tape, q, s.action, 0);
    const int td = sub(tape, tape.leaf(Eigen::MatrixXd::Constant(1, 1, targets[k])),
                       q_a);
    const int sq = square(tape, td);
    loss = (loss < 0) ? sq : add(tape, loss, sq);
  }
  loss = scale(tape, loss, 1.0 / static_cast<double>(indices.size()));

  const double loss_value = tape.value(loss)(0, 0);
  tape.backward(loss);

  std::map<std::string, Eigen::MatrixXd> grads;
  for (const auto& [name, var] : vars) grads[name] = tape.grad(var);
  adam_step(params, grads, opt, {cfg.learning_rate});
  return loss_value;
}

double DqnTrainer::update(const ReplayBuffer& buffer, std::mt19937_64& rng) {
  const double loss = dqn_update(buffer, params, target_params, opt, cfg, rng);
  ++updates;
  if (cfg.target_sync_interval > 0 && updates % cfg.target_sync_interval == 0) {
    target_params = params;
  }
  return loss;
}

}  // namespace explore::rl
