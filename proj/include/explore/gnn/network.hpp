#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "explore/exploration_graph.hpp"
#include "explore/gnn/autodiff.hpp"

namespace explore::gnn {

enum class LayerKind { GCN, GGNN };

inline constexpr int kFeatureDim = 5;

/// All trainable tensors of one policy/value network: three graph layers
/// (or one shared gated unit propagated three steps) plus a two-layer MLP
/// head mapping node embeddings to scalars.
struct PolicyParameters {
  LayerKind kind = LayerKind::GCN;
  int hidden = 32;
  int propagation_steps = 3;  // GG-NN message-passing steps
  int version = 1;
  std::map<std::string, Eigen::MatrixXd> tensors;

  const Eigen::MatrixXd& at(const std::string& name) const {
    return tensors.at(name);
  }
};

/// Glorot-uniform initialized parameters; biases start at zero.
PolicyParameters init_params(LayerKind kind, int hidden, std::uint64_t seed,
                             int feature_dim = kFeatureDim);

/// Network input derived from an exploration graph.
struct GraphBatch {
  NormalizedAdjacency adjacency;
  Eigen::MatrixXd features;        // N x 5
  std::vector<char> frontier_mask;  // true on frontier nodes
  std::vector<int> frontier_nodes;  // node indices, FrontierSet order
};

/// Edge affinity 1/(1 + d) with unit self loops, symmetrically normalized.
/// Degree sums are accumulated in value order so the result is invariant to
/// node relabeling.
NormalizedAdjacency normalize_adjacency(const ExplorationGraph& g);

GraphBatch make_batch(const ExplorationGraph& g);

struct ForwardOptions {
  double layer_dropout = 0.0;  // between graph layers / propagation steps
  double head_dropout = 0.0;   // on embeddings entering the MLP head
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

/// Named tape leaves for every parameter tensor, in map order.
std::map<std::string, int> register_params(Tape& t, const PolicyParameters& p);

/// Three-layer GCN: H' = relu(A_hat H W), dropout between layers.
int gcn_forward(Tape& t, const GraphBatch& batch, const PolicyParameters& p,
                const std::map<std::string, int>& vars,
                const ForwardOptions& opts = {});

/// Gated graph layer: messages m = A_hat (H W_msg), GRU state update per
/// step. Initial state is the feature matrix zero-padded to the hidden
/// width. `steps` <= 0 uses p.propagation_steps.
int ggnn_forward(Tape& t, const GraphBatch& batch, const PolicyParameters& p,
                 const std::map<std::string, int>& vars,
                 const ForwardOptions& opts = {}, int steps = 0);

/// Dispatch on p.kind.
int embed(Tape& t, const GraphBatch& batch, const PolicyParameters& p,
          const std::map<std::string, int>& vars, const ForwardOptions& opts = {});

enum class HeadMode { QValues, Softmax };

/// MLP head per node, masked to frontier nodes. QValues returns the raw
/// frontier scores (F x 1, frontier order); Softmax returns a distribution
/// over frontiers. Throws when the batch has no frontier.
int policy_head(Tape& t, int embeddings, const GraphBatch& batch,
                const PolicyParameters& p, const std::map<std::string, int>& vars,
                HeadMode mode, const ForwardOptions& opts = {});

// ---- inference conveniences (fresh tape per call) --------------------------

Eigen::MatrixXd forward_embeddings(const GraphBatch& batch,
                                   const PolicyParameters& p,
                                   const ForwardOptions& opts = {});

/// Frontier scores or probabilities without gradient bookkeeping.
Eigen::VectorXd forward_scores(const GraphBatch& batch, const PolicyParameters& p,
                               HeadMode mode, const ForwardOptions& opts = {});

}  // namespace explore::gnn
