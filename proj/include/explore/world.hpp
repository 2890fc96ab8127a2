#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "explore/geometry.hpp"
#include "explore/rng.hpp"

namespace explore {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Simulation parameters for one landmark world. Angles are radians,
/// lengths meters. The paper's robot senses a full 360 degree sweep.
struct WorldConfig {
  double width = 40.0;
  double height = 40.0;
  double landmark_density = 0.005;  // landmarks per m^2
  double sensor_range = 5.0;
  double range_noise_sd = 0.02;
  double bearing_noise_sd = deg2rad(0.5);
  double fov = 2.0 * kPi;
  double translation_max = 2.0;
  double translation_noise_sd = 0.1;
  double rotation_noise_sd = deg2rad(0.2);
  double cell_size = 1.0;  // occupancy grid resolution
  double coverage_target = 0.85;
  std::uint64_t seed = 0;

  void validate() const;
  Eigen::AlignedBox2d bounds() const {
    return {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(width, height)};
  }
};

struct Landmark {
  int id = 0;
  Eigen::Vector2d position{0.0, 0.0};
};

struct GroundTruth {
  Pose2 robot;
  std::vector<Landmark> landmarks;
};

/// One range-bearing return. Bearing is relative to the robot heading,
/// wrapped into (-pi, pi].
struct RangeBearing {
  int landmark_id = 0;
  double range = 0.0;
  double bearing = 0.0;
};

using SensorScan = std::vector<RangeBearing>;

/// Rotate-then-translate command executed in one timestep.
struct MotionCommand {
  double rotation = 0.0;     // [-pi, pi]
  double translation = 0.0;  // [0, translation_max]
};

/// Sample a landmark world. Landmark count is round(area * density),
/// positions uniform in bounds, robot start uniform with uniform heading.
/// Deterministic given cfg.seed.
GroundTruth generate_world(const WorldConfig& cfg);

/// Apply one motion command with truncated Gaussian actuation noise.
/// Out-of-bound commands are clamped; each clamp bumps *clamp_warnings.
GroundTruth step_motion(const GroundTruth& truth, const MotionCommand& cmd,
                        const WorldConfig& cfg, std::mt19937_64& rng,
                        int* clamp_warnings = nullptr);

/// Range-bearing returns for every landmark within sensor range.
SensorScan sense(const GroundTruth& truth, const WorldConfig& cfg,
                 std::mt19937_64& rng);

/// Straight-line plan: one aligning rotation (omitted when already aligned),
/// then greedy <= translation_max legs summing to the goal distance.
std::vector<MotionCommand> plan_path(const Pose2& from, const Eigen::Vector2d& to,
                                     const WorldConfig& cfg);

inline double path_length(const std::vector<MotionCommand>& cmds) {
  double d = 0.0;
  for (const auto& c : cmds) d += c.translation;
  return d;
}

}  // namespace explore
