#pragma once

#include <cmath>
#include <numbers>

#include "wolly/error.hpp"

namespace wolly {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Continuous robot configuration. theta is counter-clockwise from +x and is
// kept in [0, 2pi) by every operation in this header.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

// Speeds of the left and right wheel pairs of the skid-steer base, in m/s.
struct WheelSpeeds {
  double left = 0.0;
  double right = 0.0;
};

struct KinematicsConfig {
  double track_width = 0.2;  // m
  double v_max = 0.5;        // m/s
};

// Below this angular rate the motion is integrated as a straight segment.
inline constexpr double kOmegaEpsilon = 1e-9;

inline double normalize_heading(double theta) {
  if (!std::isfinite(theta)) {
    throw InvalidAngle("heading must be finite");
  }
  double wrapped = std::fmod(theta, kTwoPi);
  if (wrapped < 0.0) {
    wrapped += kTwoPi;
  }
  // fmod + addition can round up to exactly 2pi for tiny negative inputs.
  if (wrapped >= kTwoPi) {
    wrapped = 0.0;
  }
  return wrapped;
}

inline void check_wheel_limits(const WheelSpeeds& wheels, double v_max) {
  if (!std::isfinite(wheels.left) || !std::isfinite(wheels.right)) {
    throw InvalidParameter("wheel speeds must be finite");
  }
  if (std::abs(wheels.left) > v_max || std::abs(wheels.right) > v_max) {
    throw InvalidParameter("wheel speed exceeds v_max");
  }
}

struct BodyVelocity {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s
};

inline BodyVelocity body_velocity(const WheelSpeeds& wheels, double track_width) {
  return {(wheels.left + wheels.right) / 2.0, (wheels.right - wheels.left) / track_width};
}

// Exact unicycle update for constant wheel speeds held for dt seconds. The
// robot follows a circular arc of radius v/omega, or a straight line when
// omega is (numerically) zero.
inline Pose step(const Pose& pose, const WheelSpeeds& wheels, double track_width, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidParameter("dt must be positive");
  }
  if (!(track_width > 0.0) || !std::isfinite(track_width)) {
    throw InvalidParameter("track_width must be positive");
  }
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y)) {
    throw InvalidParameter("pose must be finite");
  }
  if (!std::isfinite(wheels.left) || !std::isfinite(wheels.right)) {
    throw InvalidParameter("wheel speeds must be finite");
  }

  const auto [v, omega] = body_velocity(wheels, track_width);
  const double theta0 = normalize_heading(pose.theta);

  if (std::abs(omega) < kOmegaEpsilon) {
    return {pose.x + v * std::cos(theta0) * dt, pose.y + v * std::sin(theta0) * dt, theta0};
  }

  const double theta1 = theta0 + omega * dt;
  const double radius = v / omega;
  return {pose.x + radius * (std::sin(theta1) - std::sin(theta0)),
          pose.y - radius * (std::cos(theta1) - std::cos(theta0)),
          normalize_heading(theta1)};
}

inline Pose step(const Pose& pose, const WheelSpeeds& wheels, const KinematicsConfig& config,
                 double dt) {
  check_wheel_limits(wheels, config.v_max);
  return step(pose, wheels, config.track_width, dt);
}

// Smallest signed difference a - b wrapped to (-pi, pi].
inline double heading_difference(double a, double b) {
  double d = std::fmod(a - b, kTwoPi);
  if (d > std::numbers::pi) d -= kTwoPi;
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

}  // namespace wolly
