#include "explore/virtual_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

namespace explore {

VirtualMap::VirtualMap(const Eigen::AlignedBox2d& bounds, double cell_size)
    : origin_(bounds.min()), cell_size_(cell_size) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("VirtualMap: bad cell size");
  const Eigen::Vector2d extent = bounds.max() - bounds.min();
  nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_size)));
  ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_size)));
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, Eigen::Matrix2d::Identity());
}

Eigen::Vector2i VirtualMap::clamped_cell_at(const Eigen::Vector2d& p) const {
  int ix = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_size_));
  int iy = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_size_));
  ix = std::clamp(ix, 0, nx_ - 1);
  iy = std::clamp(iy, 0, ny_ - 1);
  return {ix, iy};
}

std::uint64_t VirtualMap::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& m : cells_) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data());
    for (std::size_t i = 0; i < sizeof(double) * 4; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  }
  return h;
}

double a_optimality(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) {
    throw std::invalid_argument("a_optimality: matrix must be square");
  }
  return cov.trace();
}

double utility(const VirtualMap& vm) {
  double u = 0.0;
  for (int iy = 0; iy < vm.ny(); ++iy) {
    for (int ix = 0; ix < vm.nx(); ++ix) {
      u += vm.cell_trace(ix, iy);
    }
  }
  return u;
}

namespace {

// Covariance of a range-bearing observation of `cell` taken from `pose`,
// mapped into the cell position frame: J R J^T.
Eigen::Matrix2d sensor_noise_cov(const Eigen::Vector2d& pose_position,
                                 const Eigen::Vector2d& cell,
                                 const WorldConfig& cfg) {
  const Eigen::Vector2d d = cell - pose_position;
  const double r = d.norm();
  const double a = (r > 1e-12) ? std::atan2(d.y(), d.x()) : 0.0;
  Eigen::Matrix2d J;
  J << std::cos(a), -r * std::sin(a), std::sin(a), r * std::cos(a);
  const Eigen::Vector2d noise(cfg.range_noise_sd * cfg.range_noise_sd,
                              cfg.bearing_noise_sd * cfg.bearing_noise_sd);
  return J * noise.asDiagonal() * J.transpose();
}

}  // namespace

void update_virtual_map(VirtualMap& vm, std::span<const Pose2> path,
                        std::span<const Eigen::Matrix3d> pose_covariances,
                        const WorldConfig& cfg) {
  if (path.size() != pose_covariances.size()) {
    throw std::invalid_argument("update_virtual_map: path/covariance length mismatch");
  }
  const double range = cfg.sensor_range;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Eigen::Vector2d p = path[k].position();
    const Eigen::Matrix2d pose_pos_cov = pose_covariances[k].topLeftCorner<2, 2>();

    const Eigen::Vector2i lo = vm.clamped_cell_at(p - Eigen::Vector2d(range, range));
    const Eigen::Vector2i hi = vm.clamped_cell_at(p + Eigen::Vector2d(range, range));
    for (int iy = lo.y(); iy <= hi.y(); ++iy) {
      for (int ix = lo.x(); ix <= hi.x(); ++ix) {
        const Eigen::Vector2d c = vm.center(ix, iy);
        if ((c - p).norm() > range) continue;
        const Eigen::Matrix2d candidate = pose_pos_cov + sensor_noise_cov(p, c, cfg);
        if (candidate.trace() < vm.cell_trace(ix, iy)) {
          vm.set_covariance(ix, iy, candidate);
        }
      }
    }
  }
}

namespace {

// EKF prediction through one rotate-then-translate command.
void ekf_predict(Pose2& pose, Eigen::Matrix3d& cov, const MotionCommand& cmd,
                 const WorldConfig& cfg) {
  const double th = wrap_angle(pose.theta + cmd.rotation);
  const double ct = std::cos(th);
  const double st = std::sin(th);
  const double d = cmd.translation;

  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  F(0, 2) = -d * st;
  F(1, 2) = d * ct;

  Eigen::Matrix<double, 3, 2> G;
  G << ct, -d * st, st, d * ct, 0.0, 1.0;
  const Eigen::Vector2d noise(cfg.translation_noise_sd * cfg.translation_noise_sd,
                              cfg.rotation_noise_sd * cfg.rotation_noise_sd);

  cov = F * cov * F.transpose() + G * noise.asDiagonal() * G.transpose();
  pose = apply_motion(pose, cmd.rotation, cmd.translation);
}

// EKF range-bearing update against a mapped landmark treated as known.
void ekf_update(const Pose2& pose, Eigen::Matrix3d& cov,
                const Eigen::Vector2d& landmark, const WorldConfig& cfg) {
  const double dx = landmark.x() - pose.x;
  const double dy = landmark.y() - pose.y;
  const double q = std::max(dx * dx + dy * dy, 1e-12);
  const double r = std::sqrt(q);

  Eigen::Matrix<double, 2, 3> H;
  H << -dx / r, -dy / r, 0.0, dy / q, -dx / q, -1.0;
  Eigen::Matrix2d R;
  R << cfg.range_noise_sd * cfg.range_noise_sd, 0.0, 0.0,
      cfg.bearing_noise_sd * cfg.bearing_noise_sd;
  R.diagonal() = R.diagonal().cwiseMax(1e-12);

  const Eigen::Matrix2d S = H * cov * H.transpose() + R;
  const Eigen::Matrix<double, 3, 2> K = cov * H.transpose() * S.inverse();
  const Eigen::Matrix3d IKH = Eigen::Matrix3d::Identity() - K * H;
  cov = IKH * cov * IKH.transpose() + K * R * K.transpose();  // Joseph form
}

}  // namespace

CandidateOutcome simulate_candidate(const VirtualMap& vm,
                                    const Estimate& slam_estimate,
                                    const Eigen::Matrix3d& current_pose_cov,
                                    const Eigen::Vector2d& frontier,
                                    const WorldConfig& cfg) {
  if (slam_estimate.poses.empty()) {
    throw std::invalid_argument("simulate_candidate: estimate has no pose");
  }
  if (!frontier.allFinite()) {
    throw std::invalid_argument("simulate_candidate: non-finite frontier");
  }

  Pose2 pose = slam_estimate.poses.back();
  Eigen::Matrix3d cov = current_pose_cov;
  const std::vector<MotionCommand> cmds = plan_path(pose, frontier, cfg);

  std::vector<Pose2> path;
  std::vector<Eigen::Matrix3d> covs;
  path.reserve(cmds.size() + 1);
  covs.reserve(cmds.size() + 1);
  path.push_back(pose);
  covs.push_back(cov);

  for (const auto& cmd : cmds) {
    ekf_predict(pose, cov, cmd, cfg);
    // forward-simulated SLAM corrections from landmarks already in the map
    for (const auto& [id, lm] : slam_estimate.landmarks) {
      if ((lm - pose.position()).norm() <= cfg.sensor_range) {
        ekf_update(pose, cov, lm, cfg);
      }
    }
    path.push_back(pose);
    covs.push_back(cov);
  }

  VirtualMap scratch = vm;
  update_virtual_map(scratch, path, covs, cfg);
  return {utility(scratch), path_length(cmds)};
}

void save_virtual_map(const VirtualMap& vm, std::ostream& os) {
  os.precision(17);
  os << "origin " << vm.origin().x() << ' ' << vm.origin().y() << '\n';
  os << "cell_size " << vm.cell_size() << '\n';
  os << "rows " << vm.ny() << '\n';
  os << "cols " << vm.nx() << '\n';
  for (int iy = 0; iy < vm.ny(); ++iy) {
    for (int ix = 0; ix < vm.nx(); ++ix) {
      os << vm.cell_trace(ix, iy) << (ix + 1 == vm.nx() ? '\n' : ' ');
    }
  }
}

}  // namespace explore
