#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "explore/episode.hpp"
#include "explore/rl/a2c.hpp"
#include "explore/rl/config.hpp"
#include "explore/rl/dqn.hpp"

namespace explore::rl {

struct EpisodeLogRow {
  long episode = 0;
  int steps = 0;  // decisions taken
  double mean_reward = 0.0;
  double coverage = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  gnn::PolicyParameters params;  // DQN online net / A2C policy net
  std::optional<gnn::PolicyParameters> value_params;  // A2C critic
  std::vector<EpisodeLogRow> episodes;
  long total_decisions = 0;
  int max_graph_nodes = 0;  // largest exploration graph seen while training
};

/// Episode-generating training loop: fresh random worlds, one transition per
/// frontier decision, DQN updates every step from the replay buffer or A2C
/// updates every policy_update_steps from the cleared rollout. When
/// `out_dir` is non-empty, checkpoints land there and a non-finite loss
/// aborts after writing a diagnostic checkpoint. `log` receives one CSV row
/// per episode.
TrainResult train(const EpisodeParams& episode_params, const TrainConfig& cfg,
                  Algorithm algorithm, gnn::LayerKind kind, std::uint64_t seed,
                  const std::string& out_dir = "", std::ostream* log = nullptr,
                  std::ostream* progress = nullptr);

void write_episode_log(const std::vector<EpisodeLogRow>& rows, std::ostream& os);

}  // namespace explore::rl
