#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <iosfwd>
#include <span>
#include <vector>

#include "explore/slam.hpp"
#include "explore/world.hpp"

namespace explore {

/// Grid of virtual landmarks. Each cell carries a 2x2 position covariance
/// starting at diag(1, 1) m^2; observing the cell can only shrink its trace.
class VirtualMap {
 public:
  VirtualMap(const Eigen::AlignedBox2d& bounds, double cell_size = 2.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cell_count() const { return nx_ * ny_; }
  double cell_size() const { return cell_size_; }
  const Eigen::Vector2d& origin() const { return origin_; }

  Eigen::Vector2d center(int ix, int iy) const {
    return {origin_.x() + (ix + 0.5) * cell_size_,
            origin_.y() + (iy + 0.5) * cell_size_};
  }
  bool contains(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < nx_ && iy < ny_;
  }
  /// Cell index containing p, clamped to the grid edge.
  Eigen::Vector2i clamped_cell_at(const Eigen::Vector2d& p) const;

  const Eigen::Matrix2d& covariance(int ix, int iy) const {
    return cells_[iy * nx_ + ix];
  }
  void set_covariance(int ix, int iy, const Eigen::Matrix2d& cov) {
    cells_[iy * nx_ + ix] = cov;
  }
  double cell_trace(int ix, int iy) const { return covariance(ix, iy).trace(); }

  /// FNV-1a over the raw covariance bytes; used by isolation checks.
  std::uint64_t checksum() const;

 private:
  Eigen::Vector2d origin_;
  double cell_size_;
  int nx_, ny_;
  std::vector<Eigen::Matrix2d> cells_;
};

/// A-optimality criterion: the trace of a covariance matrix.
double a_optimality(const Eigen::MatrixXd& cov);

/// Summed A-optimality over every virtual landmark.
double utility(const VirtualMap& vm);

/// Fuse a pose path into the map: every cell within sensor range of a path
/// pose receives candidate covariance (pose position block) + J R J^T, with
/// J mapping range-bearing noise into the cell frame; cells keep the
/// minimum-trace alternative. Utility is non-increasing under this update.
void update_virtual_map(VirtualMap& vm, std::span<const Pose2> path,
                        std::span<const Eigen::Matrix3d> pose_covariances,
                        const WorldConfig& cfg);

struct CandidateOutcome {
  double predicted_utility = 0.0;  // m^2
  double travel_cost = 0.0;        // m
};

/// Forward-simulate visiting `frontier`: plan a straight path from the last
/// estimated pose, propagate pose covariance by EKF prediction (with
/// measurement updates against already-mapped landmarks passed in range),
/// fuse the simulated path into a private copy, and report its utility and
/// path length. `vm` itself is never touched.
CandidateOutcome simulate_candidate(const VirtualMap& vm,
                                    const Estimate& slam_estimate,
                                    const Eigen::Matrix3d& current_pose_cov,
                                    const Eigen::Vector2d& frontier,
                                    const WorldConfig& cfg);

/// Per-cell trace matrix as plain text (rows top to bottom) for rendering
/// error-ellipse style figures externally.
void save_virtual_map(const VirtualMap& vm, std::ostream& os);

}  // namespace explore
