#include "explore/episode.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace explore {

Episode::Episode(const EpisodeParams& params, std::uint64_t seed)
    : params_([&] {
        EpisodeParams p = params;
        p.world.seed = seed;
        return p;
      }()),
      truth_(generate_world(params_.world)),
      motion_rng_(substream(seed, "motion")),
      sensor_rng_(substream(seed, "sensor")),
      grid_(OccupancyGrid::for_world(params_.world)),
      vm_(params_.world.bounds(), params_.vm_cell_size) {
  // the first pose anchors the gauge: tight prior at the known start
  slam_graph_.add_pose();
  slam_graph_.add_prior({0, truth_.robot, params_.prior_sigmas});
  estimate_.poses.push_back(truth_.robot);

  const SensorScan initial_scan = sense(truth_, params_.world, sensor_rng_);
  observe_initial(initial_scan);

  estimate_ = optimize(slam_graph_, estimate_);
  marginals_.emplace(slam_graph_, estimate_);
  pose_cov_ = marginals_->block(VariableKey::pose(0));
  max_pose_trace_ = pose_cov_.trace();

  update_occupancy(grid_, estimate_.poses.back(), initial_scan, params_.world,
                   params_.occupancy);
  const Pose2 p0 = estimate_.poses.back();
  update_virtual_map(vm_, std::span<const Pose2>(&p0, 1),
                     std::span<const Eigen::Matrix3d>(&pose_cov_, 1),
                     params_.world);
  refresh();
}

void Episode::observe_initial(const SensorScan& scan) {
  for (const auto& rb : scan) {
    if (rb.landmark_id < 0) {
      throw std::invalid_argument("episode: negative landmark id");
    }
    if (!slam_graph_.has_landmark(rb.landmark_id)) {
      slam_graph_.add_landmark(rb.landmark_id);
      const double a = estimate_.poses[0].theta + rb.bearing;
      estimate_.landmarks[rb.landmark_id] =
          estimate_.poses[0].position() +
          rb.range * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    const auto& w = params_.world;
    slam_graph_.add_measurement(
        {0, rb.landmark_id, rb.range, rb.bearing,
         w.range_noise_sd > 0.0 ? w.range_noise_sd : 1e-3,
         w.bearing_noise_sd > 0.0 ? w.bearing_noise_sd : 1e-3});
  }
}

void Episode::execute_frontier_node(int node_index) {
  if (done()) throw std::logic_error("episode: already finished");
  if (node_index < 0 || node_index >= graph_.size() ||
      graph_.nodes[node_index].kind != NodeKind::Frontier) {
    throw std::invalid_argument("episode: node is not a frontier");
  }
  const Eigen::Vector2d goal = graph_.nodes[node_index].position;
  const auto cmds = plan_path(estimate_.poses.back(), goal, params_.world);
  for (const auto& cmd : cmds) {
    motion_step(cmd);
    if (end_reason_ == EndReason::SlamFailure) return;
  }
  ++decisions_;
  refresh();
}

void Episode::motion_step(const MotionCommand& cmd) {
  truth_ = step_motion(truth_, cmd, params_.world, motion_rng_, &clamp_warnings_);
  const SensorScan scan = sense(truth_, params_.world, sensor_rng_);

  incorporate_step(slam_graph_, estimate_, cmd, scan, params_.world);
  estimate_ = optimize(slam_graph_, estimate_);
  if (!estimate_.converged) {
    end_reason_ = EndReason::SlamFailure;
    return;
  }
  marginals_.emplace(slam_graph_, estimate_);
  pose_cov_ = marginals_->block(VariableKey::pose(slam_graph_.num_poses() - 1));
  max_pose_trace_ = std::max(max_pose_trace_, pose_cov_.trace());

  update_occupancy(grid_, estimate_.poses.back(), scan, params_.world,
                   params_.occupancy);
  const Pose2 p = estimate_.poses.back();
  update_virtual_map(vm_, std::span<const Pose2>(&p, 1),
                     std::span<const Eigen::Matrix3d>(&pose_cov_, 1),
                     params_.world);

  ++motion_steps_;
  distance_ += cmd.translation;
  if (on_step_) on_step_(*this);
}

void Episode::refresh() {
  coverage_ = coverage_fraction(grid_, params_.world.bounds());
  frontiers_ = detect_frontiers(grid_, params_.occupancy);

  if (coverage_ >= params_.world.coverage_target) {
    end_reason_ = EndReason::Coverage;
  } else if (frontiers_.empty()) {
    end_reason_ = EndReason::NoFrontiers;
  } else if (decisions_ >= params_.decision_cap) {
    end_reason_ = EndReason::DecisionCap;
  }

  if (!frontiers_.empty()) {
    const auto t0 = std::chrono::steady_clock::now();
    graph_ = build_graph(estimate_, slam_graph_, frontiers_, vm_, grid_);
    last_graph_build_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  }
}

double Episode::map_entropy() const {
  return map_entropy_bits(grid_, params_.world.bounds());
}

Eigen::Matrix2d Episode::landmark_covariance(int id) const {
  if (!marginals_) throw std::logic_error("episode: no marginals yet");
  return marginals_->block(VariableKey::landmark(id));
}

double Episode::mean_landmark_trace() const {
  if (!marginals_ || slam_graph_.num_landmarks() == 0) return 0.0;
  double sum = 0.0;
  for (int id : slam_graph_.landmark_ids()) {
    sum += marginals_->block(VariableKey::landmark(id)).trace();
  }
  return sum / slam_graph_.num_landmarks();
}

}  // namespace explore
