#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>

#include "explore/exploration_graph.hpp"
#include "explore/occupancy.hpp"
#include "explore/slam.hpp"
#include "explore/virtual_map.hpp"
#include "explore/world.hpp"

namespace explore {

struct EpisodeParams {
  WorldConfig world;
  double vm_cell_size = 2.0;
  OccupancyParams occupancy;
  Eigen::Vector3d prior_sigmas{1e-3, 1e-3, 1e-3};
  int decision_cap = 200;
};

/// One exploration run: simulated robot, SLAM smoother, occupancy grid,
/// virtual map, and the exploration graph rebuilt after every decision.
/// Motion and sensing draw from named sub-streams of the episode seed, so a
/// run is bit-reproducible given (params, seed, action choices).
class Episode {
 public:
  enum class EndReason { None, Coverage, NoFrontiers, DecisionCap, SlamFailure };

  /// Called after every motion step, once all state is consistent.
  using StepCallback = std::function<void(const Episode&)>;

  Episode(const EpisodeParams& params, std::uint64_t seed);

  bool done() const { return end_reason_ != EndReason::None; }
  EndReason end_reason() const { return end_reason_; }

  /// Travel to the frontier held by graph node `node_index` (must be a
  /// frontier node of the current graph), then re-solve, refresh frontiers
  /// and rebuild the graph.
  void execute_frontier_node(int node_index);

  const EpisodeParams& params() const { return params_; }
  const GroundTruth& truth() const { return truth_; }
  const FactorGraph& slam_graph() const { return slam_graph_; }
  const Estimate& estimate() const { return estimate_; }
  const Eigen::Matrix3d& current_pose_covariance() const { return pose_cov_; }
  const OccupancyGrid& grid() const { return grid_; }
  const VirtualMap& virtual_map() const { return vm_; }
  const FrontierSet& frontiers() const { return frontiers_; }

  /// Last built graph; stays at its final value once the episode ends.
  const ExplorationGraph& graph() const { return graph_; }

  double coverage() const { return coverage_; }
  double map_entropy() const;
  double max_pose_trace() const { return max_pose_trace_; }
  Eigen::Matrix2d landmark_covariance(int id) const;
  /// Mean marginal trace over mapped landmarks; 0 before any is mapped.
  double mean_landmark_trace() const;

  int decisions() const { return decisions_; }
  int motion_steps() const { return motion_steps_; }
  double distance_traveled() const { return distance_; }
  int clamp_warnings() const { return clamp_warnings_; }
  double last_graph_build_seconds() const { return last_graph_build_seconds_; }

  void set_step_callback(StepCallback cb) { on_step_ = std::move(cb); }

 private:
  void motion_step(const MotionCommand& cmd);
  void observe_initial(const SensorScan& scan);
  void refresh();

  EpisodeParams params_;
  GroundTruth truth_;
  std::mt19937_64 motion_rng_;
  std::mt19937_64 sensor_rng_;

  FactorGraph slam_graph_;
  Estimate estimate_;
  std::optional<Marginals> marginals_;
  Eigen::Matrix3d pose_cov_ = Eigen::Matrix3d::Zero();

  OccupancyGrid grid_;
  VirtualMap vm_;
  FrontierSet frontiers_;
  ExplorationGraph graph_;
  EndReason end_reason_ = EndReason::None;

  double coverage_ = 0.0;
  double max_pose_trace_ = 0.0;
  int decisions_ = 0;
  int motion_steps_ = 0;
  double distance_ = 0.0;
  int clamp_warnings_ = 0;
  double last_graph_build_seconds_ = 0.0;
  StepCallback on_step_;
};

}  // namespace explore
