#include "explore/world.hpp"

#include <algorithm>
#include <cmath>

namespace explore {

void WorldConfig::validate() const {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ConfigError("world: width and height must be positive");
  }
  if (landmark_density < 0.0) throw ConfigError("world: landmark_density < 0");
  if (!(sensor_range > 0.0)) throw ConfigError("world: sensor_range must be positive");
  if (!(translation_max > 0.0)) throw ConfigError("world: translation_max must be positive");
  if (!(cell_size > 0.0)) throw ConfigError("world: cell_size must be positive");
  if (!(coverage_target > 0.0) || coverage_target > 1.0) {
    throw ConfigError("world: coverage_target must be in (0, 1]");
  }
}

GroundTruth generate_world(const WorldConfig& cfg) {
  cfg.validate();
  auto rng = substream(cfg.seed, "world");
  std::uniform_real_distribution<double> ux(0.0, cfg.width);
  std::uniform_real_distribution<double> uy(0.0, cfg.height);

  GroundTruth truth;
  const int count =
      static_cast<int>(std::lround(cfg.width * cfg.height * cfg.landmark_density));
  truth.landmarks.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    truth.landmarks.push_back({i, {x, y}});
  }

  truth.robot.x = ux(rng);
  truth.robot.y = uy(rng);
  // uniform heading in (-pi, pi]
  std::uniform_real_distribution<double> uh(-kPi, kPi);
  truth.robot.theta = wrap_angle(uh(rng));
  return truth;
}

GroundTruth step_motion(const GroundTruth& truth, const MotionCommand& cmd,
                        const WorldConfig& cfg, std::mt19937_64& rng,
                        int* clamp_warnings) {
  double rot = cmd.rotation;
  double trans = cmd.translation;
  if (rot < -kPi || rot > kPi || trans < 0.0 || trans > cfg.translation_max) {
    rot = std::clamp(rot, -kPi, kPi);
    trans = std::clamp(trans, 0.0, cfg.translation_max);
    if (clamp_warnings) ++(*clamp_warnings);
  }

  const double noisy_rot = rot + truncated_gaussian(rng, cfg.rotation_noise_sd);
  const double noisy_trans = trans + truncated_gaussian(rng, cfg.translation_noise_sd);

  GroundTruth next = truth;
  next.robot = apply_motion(truth.robot, noisy_rot, noisy_trans);
  return next;
}

SensorScan sense(const GroundTruth& truth, const WorldConfig& cfg,
                 std::mt19937_64& rng) {
  SensorScan scan;
  const Eigen::Vector2d p = truth.robot.position();
  for (const auto& lm : truth.landmarks) {
    const Eigen::Vector2d d = lm.position - p;
    const double dist = d.norm();
    if (dist > cfg.sensor_range) continue;
    const double bearing = wrap_angle(std::atan2(d.y(), d.x()) - truth.robot.theta);
    // fov is 2*pi for this robot; an aperture smaller than the full circle
    // culls returns outside +/- fov/2.
    if (cfg.fov < 2.0 * kPi && std::abs(bearing) > 0.5 * cfg.fov) continue;
    double r = dist + truncated_gaussian(rng, cfg.range_noise_sd);
    r = std::clamp(r, 1e-6, cfg.sensor_range);
    const double b = wrap_angle(bearing + truncated_gaussian(rng, cfg.bearing_noise_sd));
    scan.push_back({lm.id, r, b});
  }
  return scan;
}

std::vector<MotionCommand> plan_path(const Pose2& from, const Eigen::Vector2d& to,
                                     const WorldConfig& cfg) {
  if (!to.allFinite()) throw std::invalid_argument("plan_path: non-finite goal");
  std::vector<MotionCommand> cmds;
  const Eigen::Vector2d d = to - from.position();
  const double dist = d.norm();
  if (dist < 1e-12) return cmds;

  const double goal_bearing = std::atan2(d.y(), d.x());
  const double turn = wrap_angle(goal_bearing - from.theta);
  if (std::abs(turn) > 1e-12) cmds.push_back({turn, 0.0});

  double remaining = dist;
  while (remaining > 1e-12) {
    const double leg = std::min(remaining, cfg.translation_max);
    cmds.push_back({0.0, leg});
    remaining -= leg;
  }
  return cmds;
}

}  // namespace explore
