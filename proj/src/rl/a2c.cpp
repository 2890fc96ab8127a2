#include "explore/rl/a2c.hpp"

#include <cmath>
#include <stdexcept>

namespace explore::rl {

using namespace explore::gnn;

int sample_policy_action(const ExplorationGraph& graph,
                         const PolicyParameters& policy, std::mt19937_64& rng) {
  if (graph.frontier_nodes.empty()) {
    throw std::invalid_argument("sample_policy_action: graph has no frontiers");
  }
  const GraphBatch batch = make_batch(graph);
  const Eigen::VectorXd probs =
      forward_scores(batch, policy, HeadMode::Softmax);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double draw = u(rng);
  double acc = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (draw <= acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

namespace {

// Value of a graph under the value network: max over frontier head outputs,
// matching V(G) = max_f Q(G, f).
double value_of(const ExplorationGraph& g, const PolicyParameters& value_params) {
  const GraphBatch batch = make_batch(g);
  return forward_scores(batch, value_params, HeadMode::QValues).maxCoeff();
}

}  // namespace

A2cLoss a2c_update(const std::vector<TransitionSample>& rollout,
                   PolicyParameters& policy_params, PolicyParameters& value_params,
                   AdamState& policy_opt, AdamState& value_opt,
                   const TrainConfig& cfg, std::mt19937_64& rng) {
  if (rollout.empty()) throw std::invalid_argument("a2c_update: empty rollout");
  const int n = static_cast<int>(rollout.size());

  // n-step returns bootstrapped by the value of the final next-graph
  std::vector<double> returns(n);
  double carry = 0.0;
  const TransitionSample& last = rollout.back();
  if (!last.terminal && !last.next_graph.frontier_nodes.empty()) {
    carry = value_of(last.next_graph, value_params);
  }
  for (int t = n - 1; t >= 0; --t) {
    if (rollout[t].terminal) {
      carry = 0.0;
    }
    carry = rollout[t].reward + cfg.gamma * carry;
    returns[t] = carry;
  }

  std::vector<GraphBatch> batches;
  batches.reserve(n);
  for (const auto& s : rollout) batches.push_back(make_batch(s.graph));

  Tape tape;
  const auto policy_vars = register_params(tape, policy_params);
  const auto value_vars = register_params(tape, value_params);
  ForwardOptions opts;
  opts.layer_dropout = cfg.layer_dropout;
  opts.training = cfg.layer_dropout > 0.0;
  opts.rng = &rng;

  int policy_loss = -1;
  int value_loss = -1;
  int entropy_loss = -1;
  auto append = [&tape](int acc, int term) {
    return acc < 0 ? term : add(tape, acc, term);
  };

  for (int t = 0; t < n; ++t) {
    const TransitionSample& s = rollout[t];

    // critic: beta (R - V)^2 with V = max over frontier value outputs
    const int ve = embed(tape, batches[t], value_params, value_vars, opts);
    const int vq = policy_head(tape, ve, batches[t], value_params, value_vars,
                               HeadMode::QValues, opts);
    const int v = max_col(tape, vq);
    const double v_now = tape.value(v)(0, 0);
    const int ret = tape.leaf(Eigen::MatrixXd::Constant(1, 1, returns[t]));
    value_loss = append(value_loss, square(tape, sub(tape, ret, v)));

    // actor: -A log pi(a) with the advantage detached
    const double advantage = returns[t] - v_now;
    const int pe = embed(tape, batches[t], policy_params, policy_vars, opts);
    const int scores = policy_head(tape, pe, batches[t], policy_params,
                                   policy_vars, HeadMode::QValues, opts);
    const int logp = log_softmax_col(tape, scores);
    const int logp_a = entry(tape, logp, s.action, 0);
    policy_loss = append(policy_loss, scale(tape, logp_a, -advantage));

    // entropy pressure: sum_f pi log pi
    const int probs = exp_op(tape, logp);
    entropy_loss = append(entropy_loss, sum_all(tape, cmul(tape, probs, logp)));
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  policy_loss = scale(tape, policy_loss, inv_n);
  value_loss = scale(tape, value_loss, inv_n);
  entropy_loss = scale(tape, entropy_loss, inv_n);

  const int total =
      add(tape, add(tape, policy_loss, scale(tape, value_loss, cfg.beta)),
          scale(tape, entropy_loss, cfg.eta));

  A2cLoss out;
  out.policy_term = tape.value(policy_loss)(0, 0);
  out.value_term = tape.value(value_loss)(0, 0);
  out.entropy_term = tape.value(entropy_loss)(0, 0);
  out.total = tape.value(total)(0, 0);

  tape.backward(total);

  std::map<std::string, Eigen::MatrixXd> policy_grads;
  for (const auto& [name, var] : policy_vars) policy_grads[name] = tape.grad(var);
  std::map<std::string, Eigen::MatrixXd> value_grads;
  for (const auto& [name, var] : value_vars) value_grads[name] = tape.grad(var);

  adam_step(policy_params, policy_grads, policy_opt, {cfg.learning_rate});
  adam_step(value_params, value_grads, value_opt, {cfg.learning_rate});
  return out;
}

}  // namespace explore::rl
