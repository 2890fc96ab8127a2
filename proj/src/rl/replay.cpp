#include "explore/rl/replay.hpp"

#include <stdexcept>

namespace explore::rl {

void ReplayBuffer::push(TransitionSample sample) {
  if (sample.action < 0 ||
      sample.action >= static_cast<int>(sample.graph.frontier_nodes.size())) {
    throw std::invalid_argument("ReplayBuffer: action is not a frontier index");
  }
  if (sample.reward < -1.0 || sample.reward > 1.0) {
    throw std::invalid_argument("ReplayBuffer: reward outside [-1, 1]");
  }
  buffer_.push_back(std::move(sample));
  if (buffer_.size() > capacity_) buffer_.pop_front();
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count,
                                                      std::mt19937_64& rng) const {
  if (count > buffer_.size()) {
    throw std::invalid_argument("ReplayBuffer: not enough samples");
  }
  // partial Fisher-Yates over an index vector
  std::vector<std::size_t> idx(buffer_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace explore::rl
