#include "explore/gnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "explore/rng.hpp"

namespace explore::gnn {

namespace {

Eigen::MatrixXd glorot(int rows, int cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> u(-limit, limit);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

}  // namespace

PolicyParameters init_params(LayerKind kind, int hidden, std::uint64_t seed,
                             int feature_dim) {
  auto rng = substream(seed, "params");
  PolicyParameters p;
  p.kind = kind;
  p.hidden = hidden;

  // small positive bias keeps relu units alive and off the exact kink
  const double bias0 = 0.01;
  if (kind == LayerKind::GCN) {
    p.tensors["gcn.w0"] = glorot(feature_dim, hidden, rng);
    p.tensors["gcn.w1"] = glorot(hidden, hidden, rng);
    p.tensors["gcn.w2"] = glorot(hidden, hidden, rng);
  } else {
    if (hidden < feature_dim) {
      throw std::invalid_argument(
          "init_params: GG-NN hidden width below feature dim");
    }
    p.tensors["ggnn.w_msg"] = glorot(hidden, hidden, rng);
    for (const char* gate : {"z", "r", "h"}) {
      p.tensors[std::string("ggnn.w_") + gate] = glorot(hidden, hidden, rng);
      p.tensors[std::string("ggnn.u_") + gate] = glorot(hidden, hidden, rng);
      p.tensors[std::string("ggnn.b_") + gate] =
          Eigen::MatrixXd::Constant(1, hidden, bias0);
    }
  }
  p.tensors["head.w0"] = glorot(hidden, hidden, rng);
  p.tensors["head.b0"] = Eigen::MatrixXd::Constant(1, hidden, bias0);
  p.tensors["head.w1"] = glorot(hidden, 1, rng);
  p.tensors["head.b1"] = Eigen::MatrixXd::Constant(1, 1, bias0);
  return p;
}

NormalizedAdjacency normalize_adjacency(const ExplorationGraph& g) {
  const int n = g.size();
  NormalizedAdjacency adj;
  adj.n = n;
  adj.rows.assign(n, {});

  std::vector<std::vector<double>> affinities(n);
  for (int i = 0; i < n; ++i) affinities[i].push_back(1.0);  // self loop
  for (const auto& e : g.edges) {
    const double a = 1.0 / (1.0 + e.weight);
    affinities[e.a].push_back(a);
    affinities[e.b].push_back(a);
  }

  // order-canonical degree sums
  Eigen::VectorXd degree(n);
  for (int i = 0; i < n; ++i) {
    std::sort(affinities[i].begin(), affinities[i].end());
    double d = 0.0;
    for (double a : affinities[i]) d += a;
    degree(i) = d;
  }
  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();

  for (int i = 0; i < n; ++i) {
    adj.rows[i].push_back({i, inv_sqrt(i) * inv_sqrt(i)});
  }
  for (const auto& e : g.edges) {
    const double a = 1.0 / (1.0 + e.weight);
    adj.rows[e.a].push_back({e.b, a * inv_sqrt(e.a) * inv_sqrt(e.b)});
    adj.rows[e.b].push_back({e.a, a * inv_sqrt(e.a) * inv_sqrt(e.b)});
  }
  return adj;
}

GraphBatch make_batch(const ExplorationGraph& g) {
  GraphBatch b;
  b.adjacency = normalize_adjacency(g);
  b.features.resize(g.size(), kFeatureDim);
  for (int i = 0; i < g.size(); ++i) {
    b.features.row(i) = g.nodes[i].feature.transpose();
  }
  b.frontier_mask.assign(g.size(), 0);
  for (int idx : g.frontier_nodes) b.frontier_mask[idx] = 1;
  b.frontier_nodes = g.frontier_nodes;
  return b;
}

std::map<std::string, int> register_params(Tape& t, const PolicyParameters& p) {
  std::map<std::string, int> vars;
  for (const auto& [name, tensor] : p.tensors) {
    vars[name] = t.leaf(tensor);
  }
  return vars;
}

int gcn_forward(Tape& t, const GraphBatch& batch, const PolicyParameters& p,
                const std::map<std::string, int>& vars,
                const ForwardOptions& opts) {
  if (p.kind != LayerKind::GCN) throw std::invalid_argument("gcn_forward: wrong kind");
  int h = t.leaf(batch.features);
  const char* names[] = {"gcn.w0", "gcn.w1", "gcn.w2"};
  for (int l = 0; l < 3; ++l) {
    h = relu(t, matmul(t, spmm(t, batch.adjacency, h), vars.at(names[l])));
    if (l < 2) {
      h = dropout_op(t, h, opts.layer_dropout, opts.training, opts.rng);
    }
  }
  return h;
}

int ggnn_forward(Tape& t, const GraphBatch& batch, const PolicyParameters& p,
                 const std::map<std::string, int>& vars,
                 const ForwardOptions& opts, int steps) {
  if (p.kind != LayerKind::GGNN) throw std::invalid_argument("ggnn_forward: wrong kind");
  if (steps <= 0) steps = p.propagation_steps;
  if (steps < 1) throw std::invalid_argument("ggnn_forward: steps must be >= 1");

  const int feat = static_cast<int>(batch.features.cols());
  if (p.hidden < feat) throw std::invalid_argument("ggnn_forward: hidden < features");

  // initial state: features zero-padded to the hidden width
  Eigen::MatrixXd pad = Eigen::MatrixXd::Zero(feat, p.hidden);
  pad.topLeftCorner(feat, feat).setIdentity();
  int h = matmul(t, t.leaf(batch.features), t.leaf(pad));

  for (int s = 0; s < steps; ++s) {
    const int m = spmm(t, batch.adjacency, matmul(t, h, vars.at("ggnn.w_msg")));
    const int z = sigmoid(
        t, add_rowvec(t,
                      add(t, matmul(t, m, vars.at("ggnn.w_z")),
                          matmul(t, h, vars.at("ggnn.u_z"))),
                      vars.at("ggnn.b_z")));
    const int r = sigmoid(
        t, add_rowvec(t,
                      add(t, matmul(t, m, vars.at("ggnn.w_r")),
                          matmul(t, h, vars.at("ggnn.u_r"))),
                      vars.at("ggnn.b_r")));
    const int h_tilde = tanh_op(
        t, add_rowvec(t,
                      add(t, matmul(t, m, vars.at("ggnn.w_h")),
                          matmul(t, cmul(t, r, h), vars.at("ggnn.u_h"))),
                      vars.at("ggnn.b_h")));
    // h' = (1 - z) . h + z . h_tilde
    const int ones = t.leaf(Eigen::MatrixXd::Ones(t.value(h).rows(), p.hidden));
    h = add(t, cmul(t, sub(t, ones, z), h), cmul(t, z, h_tilde));
    if (s + 1 < steps) {
      h = dropout_op(t, h, opts.layer_dropout, opts.training, opts.rng);
    }
  }
  return h;
}

int embed(Tape& t, const GraphBatch& batch, const PolicyParameters& p,
          const std::map<std::string, int>& vars, const ForwardOptions& opts) {
  return p.kind == LayerKind::GCN ? gcn_forward(t, batch, p, vars, opts)
                                  : ggnn_forward(t, batch, p, vars, opts);
}

int policy_head(Tape& t, int embeddings, const GraphBatch& batch,
                const PolicyParameters& p, const std::map<std::string, int>& vars,
                HeadMode mode, const ForwardOptions& opts) {
  if (batch.frontier_nodes.empty()) {
    throw std::invalid_argument("policy_head: no frontier nodes");
  }
  int h = dropout_op(t, embeddings, opts.head_dropout, opts.training, opts.rng);
  h = relu(t, add_rowvec(t, matmul(t, h, vars.at("head.w0")), vars.at("head.b0")));
  h = add_rowvec(t, matmul(t, h, vars.at("head.w1")), vars.at("head.b1"));
  const int frontier_scores = gather_rows(t, h, batch.frontier_nodes);
  if (mode == HeadMode::QValues) return frontier_scores;
  return exp_op(t, log_softmax_col(t, frontier_scores));
}

Eigen::MatrixXd forward_embeddings(const GraphBatch& batch,
                                   const PolicyParameters& p,
                                   const ForwardOptions& opts) {
  Tape t;
  const auto vars = register_params(t, p);
  return t.value(embed(t, batch, p, vars, opts));
}

Eigen::VectorXd forward_scores(const GraphBatch& batch, const PolicyParameters& p,
                               HeadMode mode, const ForwardOptions& opts) {
  Tape t;
  const auto vars = register_params(t, p);
  const int e = embed(t, batch, p, vars, opts);
  const int s = policy_head(t, e, batch, p, vars, mode, opts);
  return t.value(s).col(0);
}

}  // namespace explore::gnn
