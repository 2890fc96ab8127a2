#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <iosfwd>
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "explore/world.hpp"

namespace explore {

struct PriorFactor {
  int pose = 0;
  Pose2 mean;
  Eigen::Vector3d sigmas{1e-3, 1e-3, 1e-3};  // x, y, theta
};

struct OdometryFactor {
  int from_pose = 0;
  int to_pose = 0;
  double rotation = 0.0;
  double translation = 0.0;
  double translation_sigma = 0.1;
  double rotation_sigma = 1e-2;
};

struct MeasurementFactor {
  int pose = 0;
  int landmark_id = 0;
  double range = 0.0;
  double bearing = 0.0;
  double range_sigma = 0.02;
  double bearing_sigma = 1e-2;
};

/// Pose-landmark smoothing graph. Poses are SE(2), landmarks R^2.
/// Landmarks keep their sensor ids; slots follow first-observation order.
class FactorGraph {
 public:
  int add_pose() { return num_poses_++; }
  void add_landmark(int id);
  bool has_landmark(int id) const { return landmark_slot_.count(id) > 0; }
  int landmark_slot(int id) const { return landmark_slot_.at(id); }

  void add_prior(const PriorFactor& f);
  void add_odometry(const OdometryFactor& f);
  void add_measurement(const MeasurementFactor& f);

  int num_poses() const { return num_poses_; }
  int num_landmarks() const { return static_cast<int>(landmark_ids_.size()); }
  const std::vector<int>& landmark_ids() const { return landmark_ids_; }
  const std::vector<PriorFactor>& priors() const { return priors_; }
  const std::vector<OdometryFactor>& odometry() const { return odometry_; }
  const std::vector<MeasurementFactor>& measurements() const { return measurements_; }

  /// Debug dump, one factor per line: type, variable ids, measurement,
  /// noise sigmas.
  void dump(std::ostream& os) const;

 private:
  int num_poses_ = 0;
  std::vector<int> landmark_ids_;
  std::unordered_map<int, int> landmark_slot_;
  std::vector<PriorFactor> priors_;
  std::vector<OdometryFactor> odometry_;
  std::vector<MeasurementFactor> measurements_;
};

struct Estimate {
  std::vector<Pose2> poses;
  std::map<int, Eigen::Vector2d> landmarks;  // keyed by landmark id
  bool converged = false;
  double final_residual_norm = 0.0;
  std::vector<double> cost_history;  // accepted-iteration costs, non-increasing
};

struct OptimizeOptions {
  int max_iterations = 100;
  double relative_decrease_tol = 1e-9;
  double initial_lambda = 1e-4;
  double max_lambda = 1e12;
  int dense_variable_threshold = 50;  // variables, not scalar dims
};

struct VariableKey {
  enum class Kind { Pose, Landmark } kind = Kind::Pose;
  int index = 0;  // pose index or landmark id

  static VariableKey pose(int i) { return {Kind::Pose, i}; }
  static VariableKey landmark(int id) { return {Kind::Landmark, id}; }
};

/// Levenberg-Marquardt-damped Gauss-Newton on the whitened least-squares
/// objective. Angle residuals wrap into (-pi, pi]. Never throws on solver
/// trouble; persistent failure clears Estimate::converged.
Estimate optimize(const FactorGraph& graph, const Estimate& init,
                  const OptimizeOptions& opts = {});

/// Marginal covariances from the Gauss-Newton information matrix linearized
/// at `estimate`. Factorizes once; query per-variable blocks afterwards.
class Marginals {
 public:
  Marginals(const FactorGraph& graph, const Estimate& estimate,
            const OptimizeOptions& opts = {});
  ~Marginals();

  Marginals(Marginals&&) noexcept;
  Marginals& operator=(Marginals&&) noexcept;

  /// 3x3 block for poses, 2x2 for landmarks. Unknown variable -> throws.
  Eigen::MatrixXd block(const VariableKey& key) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline Eigen::MatrixXd marginal_covariance(const FactorGraph& graph,
                                           const Estimate& estimate,
                                           const VariableKey& key) {
  return Marginals(graph, estimate).block(key);
}

/// Whitened residual stack and Jacobian at a linearization point.
/// Exposed for oracle cross-checks; `cost` is the sum of squared entries.
struct Linearization {
  Eigen::SparseMatrix<double> jacobian;
  Eigen::VectorXd residual;
  double cost = 0.0;
  int pose_offset(int pose) const { return 3 * pose; }
  int landmark_offset_base = 0;  // landmark slot s lives at base + 2 s
};

Linearization linearize(const FactorGraph& graph, const Estimate& estimate);
double graph_cost(const FactorGraph& graph, const Estimate& estimate);

/// Append one pose with its odometry factor and one measurement factor per
/// scan return. First-seen landmarks are initialized by the inverse sensor
/// model at the new pose estimate.
void incorporate_step(FactorGraph& graph, Estimate& estimate,
                      const MotionCommand& odometry, const SensorScan& scan,
                      const WorldConfig& cfg);

}  // namespace explore
