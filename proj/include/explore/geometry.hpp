#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>

namespace explore {

inline constexpr double kPi = std::numbers::pi_v<double>;

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a > kPi) {
    a -= 2.0 * kPi;
  } else if (a <= -kPi) {
    a += 2.0 * kPi;
  }
  return a;
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Planar robot pose (x, y, heading).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Eigen::Vector2d position() const { return {x, y}; }
};

/// Rotate-then-translate motion composition: the robot first turns by
/// `rotation`, then drives `translation` meters along its new heading.
inline Pose2 apply_motion(const Pose2& p, double rotation, double translation) {
  const double th = wrap_angle(p.theta + rotation);
  return {p.x + translation * std::cos(th), p.y + translation * std::sin(th), th};
}

}  // namespace explore
