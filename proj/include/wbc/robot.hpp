#pragma once

#include <array>

#include "wbc/geometry.hpp"

namespace wbc {

// Kinodynamic limits and geometry of the holonomic base + planar 2-link arm.
// Velocity/acceleration limits default to the platform interface values:
// |xd|,|yd| <= 0.1 m/s, |thetad| <= 0.2 rad/s, |phid| <= 0.5 rad/s,
// accels 0.15 / 0.15 / 0.3 / 0.8, control period 0.04 s.
struct RobotParams {
  Vec2 base_half_extents{0.48, 0.395};
  Vec2 arm_mount_offset{0.24, 0.0};  // base frame
  double link_length_1 = 0.316;
  double link_length_2 = 0.30;
  double link_radius = 0.06;
  std::array<double, 2> joint_pos_limits{-2.8, 2.8};  // same for both joints
  double max_base_lin_vel = 0.1;    // m/s, per body axis
  double max_base_ang_vel = 0.2;    // rad/s
  double max_joint_vel = 0.5;       // rad/s
  double max_base_lin_acc = 0.15;   // m/s^2
  double max_base_ang_acc = 0.3;    // rad/s^2
  double max_joint_acc = 0.8;       // rad/s^2
  double control_period = 0.04;     // s

  double reach() const { return norm(arm_mount_offset) + link_length_1 + link_length_2; }
};

struct RobotState {
  double x = 0.0, y = 0.0;        // base position, world frame
  double theta = 0.0;             // base heading, wrapped to (-pi, pi]
  double vx = 0.0, vy = 0.0;      // base linear velocity, body frame
  double omega = 0.0;             // base angular velocity
  std::array<double, 2> phi{0.0, 0.0};      // joint positions
  std::array<double, 2> phi_dot{0.0, 0.0};  // joint velocities
};

// Five discrete indices in {0..4}, ordered (xdd, ydd, thetadd, phidd1, phidd2).
using Action = std::array<int, 5>;

struct EePose {
  Vec2 pos;
  double heading = 0.0;
};

// Index k on a dimension with limit A maps to {-A, -A/2, 0, +A/2, +A}.
std::array<double, 5> action_to_accels(const Action& a, const RobotParams& p);

// Semi-implicit Euler at the control period: velocities update and clamp
// first, then the pose integrates with the new velocities (body-frame base
// velocity rotated by the pre-step heading).
RobotState integrate(const RobotState& s, const std::array<double, 5>& acc, const RobotParams& p);

EePose forward_kinematics(const RobotState& s, const RobotParams& p);

// Oriented base rectangle plus the two link capsules, world frame.
std::array<Shape, 3> collision_shapes(const RobotState& s, const RobotParams& p);

Vec2 world_to_ee_frame(const RobotState& s, const RobotParams& p, const Vec2& pt);
Vec2 ee_frame_to_world(const RobotState& s, const RobotParams& p, const Vec2& pt);

// True iff any joint is strictly outside the closed limit interval.
bool joint_limits_violated(const RobotState& s, const RobotParams& p);

}  // namespace wbc
