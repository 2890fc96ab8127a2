#include "explore/rl/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "explore/gnn/checkpoint.hpp"
#include "explore/rl/reward.hpp"

namespace explore::rl {

using gnn::LayerKind;
using gnn::PolicyParameters;

namespace {

void maybe_save(const PolicyParameters& p, const std::string& out_dir,
                const std::string& name) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  gnn::save_checkpoint_file(p, out_dir + "/" + name);
}

}  // namespace

void write_episode_log(const std::vector<EpisodeLogRow>& rows, std::ostream& os) {
  os << "episode,steps,mean_reward,coverage,wall_time_s\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.episode << ',' << r.steps << ',' << r.mean_reward << ','
       << r.coverage << ',' << r.wall_seconds << '\n';
  }
}

TrainResult train(const EpisodeParams& episode_params, const TrainConfig& cfg,
                  Algorithm algorithm, LayerKind kind, std::uint64_t seed,
                  const std::string& out_dir, std::ostream* log,
                  std::ostream* progress) {
  cfg.validate();
  episode_params.world.validate();

  auto action_rng = substream(seed, "action");
  auto update_rng = substream(seed, "update");

  const PolicyParameters initial =
      gnn::init_params(kind, cfg.hidden_width, substream_seed(seed, "init"));

  std::optional<DqnTrainer> dqn;
  std::optional<A2cTrainer> a2c;
  if (algorithm == Algorithm::DQN) {
    dqn.emplace(initial, cfg);
  } else {
    const PolicyParameters value =
        gnn::init_params(kind, cfg.hidden_width, substream_seed(seed, "init-value"));
    a2c.emplace(initial, value, cfg);
  }

  ReplayBuffer buffer(cfg.buffer_capacity);
  std::vector<TransitionSample> rollout;

  TrainResult result{initial, std::nullopt, {}, 0, 0};
  long step = 0;
  long episode_index = 0;
  int empty_episodes_in_a_row = 0;

  while (step < cfg.max_training_steps) {
    Episode ep(episode_params, substream_seed(seed, "episode", episode_index));
    const auto t0 = std::chrono::steady_clock::now();
    double reward_sum = 0.0;
    int episode_decisions = 0;

    while (!ep.done() && step < cfg.max_training_steps) {
      const ExplorationGraph graph = ep.graph();
      result.max_graph_nodes = std::max(result.max_graph_nodes, graph.size());

      int action = 0;
      if (algorithm == Algorithm::DQN) {
        action = action_sampling(graph, dqn->params, cfg.dropout_rate_at(step),
                                 action_rng);
      } else {
        action = sample_policy_action(graph, a2c->policy_params, action_rng);
      }

      const double r = reward(ep, action, cfg.alpha);
      ep.execute_frontier_node(graph.frontier_nodes[action]);

      TransitionSample sample{graph, action, r, ep.graph(), ep.done()};
      ++step;
      ++episode_decisions;
      reward_sum += r;

      double loss = 0.0;
      bool updated = false;
      if (algorithm == Algorithm::DQN) {
        buffer.push(std::move(sample));
        if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
          loss = dqn->update(buffer, update_rng);
          updated = true;
        }
      } else {
        rollout.push_back(std::move(sample));
        if (step % cfg.policy_update_steps == 0) {
          loss = a2c->update(rollout, update_rng).total;
          rollout.clear();
          updated = true;
        }
      }

      if (updated && !std::isfinite(loss)) {
        const PolicyParameters& bad =
            algorithm == Algorithm::DQN ? dqn->params : a2c->policy_params;
        maybe_save(bad, out_dir, "diagnostic.ckpt");
        throw std::runtime_error("train: non-finite loss at step " +
                                 std::to_string(step));
      }
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (episode_decisions > 0) {
      empty_episodes_in_a_row = 0;
      result.episodes.push_back({episode_index, episode_decisions,
                                 reward_sum / episode_decisions, ep.coverage(),
                                 wall});
      if (progress && result.episodes.size() % 25 == 0) {
        const auto& row = result.episodes.back();
        *progress << "episode " << row.episode << " step " << step
                  << " mean_reward " << row.mean_reward << " coverage "
                  << row.coverage << '\n';
      }
    } else if (++empty_episodes_in_a_row > 100) {
      throw std::runtime_error(
          "train: 100 consecutive episodes ended before the first decision; "
          "check world/coverage configuration");
    }

    if (cfg.checkpoint_every_episodes > 0 && !out_dir.empty() &&
        episode_index % cfg.checkpoint_every_episodes == 0) {
      maybe_save(algorithm == Algorithm::DQN ? dqn->params : a2c->policy_params,
                 out_dir, "policy_latest.ckpt");
    }
    ++episode_index;
  }

  result.total_decisions = step;
  if (algorithm == Algorithm::DQN) {
    result.params = dqn->params;
  } else {
    result.params = a2c->policy_params;
    result.value_params = a2c->value_params;
  }
  if (log) write_episode_log(result.episodes, *log);
  return result;
}

}  // namespace explore::rl
