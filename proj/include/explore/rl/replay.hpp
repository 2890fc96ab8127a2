#pragma once

#include <deque>
#include <random>
#include <vector>

#include "explore/exploration_graph.hpp"

namespace explore::rl {

/// One unit of experience: the graph, the frontier-list index chosen, the
/// normalized reward, and the resulting graph.
struct TransitionSample {
  ExplorationGraph graph;
  int action = 0;  // index into graph.frontier_nodes
  double reward = 0.0;
  ExplorationGraph next_graph;
  bool terminal = false;
};

/// Bounded FIFO with uniform minibatch sampling without replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(TransitionSample sample);
  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  const TransitionSample& at(std::size_t i) const { return buffer_[i]; }

  /// `count` distinct indices drawn uniformly; count > size throws.
  std::vector<std::size_t> sample_indices(std::size_t count,
                                          std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::deque<TransitionSample> buffer_;
};

}  // namespace explore::rl
