#include "wbc/robot.hpp"

#include <algorithm>
#include <cmath>

namespace wbc {

std::array<double, 5> action_to_accels(const Action& a, const RobotParams& p) {
  const double limits[5] = {p.max_base_lin_acc, p.max_base_lin_acc, p.max_base_ang_acc,
                            p.max_joint_acc, p.max_joint_acc};
  std::array<double, 5> acc{};
  for (int i = 0; i < 5; ++i) acc[i] = (a[i] - 2) * 0.5 * limits[i];
  return acc;
}

RobotState integrate(const RobotState& s, const std::array<double, 5>& acc, const RobotParams& p) {
  const double tau = p.control_period;
  RobotState n = s;
  n.vx = std::clamp(s.vx + acc[0] * tau, -p.max_base_lin_vel, p.max_base_lin_vel);
  n.vy = std::clamp(s.vy + acc[1] * tau, -p.max_base_lin_vel, p.max_base_lin_vel);
  n.omega = std::clamp(s.omega + acc[2] * tau, -p.max_base_ang_vel, p.max_base_ang_vel);
  for (int i = 0; i < 2; ++i) {
    n.phi_dot[i] = std::clamp(s.phi_dot[i] + acc[3 + i] * tau, -p.max_joint_vel, p.max_joint_vel);
    n.phi[i] = s.phi[i] + n.phi_dot[i] * tau;
  }
  Vec2 step_world = rotate({n.vx * tau, n.vy * tau}, s.theta);
  n.x = s.x + step_world.x;
  n.y = s.y + step_world.y;
  n.theta = wrap_angle(s.theta + n.omega * tau);
  return n;
}

EePose forward_kinematics(const RobotState& s, const RobotParams& p) {
  Vec2 base{s.x, s.y};
  Vec2 mount = base + rotate(p.arm_mount_offset, s.theta);
  double a1 = s.theta + s.phi[0];
  Vec2 elbow = mount + unit(a1) * p.link_length_1;
  double a2 = a1 + s.phi[1];
  Vec2 ee = elbow + unit(a2) * p.link_length_2;
  return {ee, wrap_angle(a2)};
}

std::array<Shape, 3> collision_shapes(const RobotState& s, const RobotParams& p) {
  Vec2 base{s.x, s.y};
  Vec2 mount = base + rotate(p.arm_mount_offset, s.theta);
  double a1 = s.theta + s.phi[0];
  Vec2 elbow = mount + unit(a1) * p.link_length_1;
  Vec2 ee = elbow + unit(a1 + s.phi[1]) * p.link_length_2;
  return {Shape{oriented_box_polygon(base, p.base_half_extents, s.theta)},
          Shape{Capsule{mount, elbow, p.link_radius}},
          Shape{Capsule{elbow, ee, p.link_radius}}};
}

Vec2 world_to_ee_frame(const RobotState& s, const RobotParams& p, const Vec2& pt) {
  EePose ee = forward_kinematics(s, p);
  return rotate(pt - ee.pos, -ee.heading);
}

Vec2 ee_frame_to_world(const RobotState& s, const RobotParams& p, const Vec2& pt) {
  EePose ee = forward_kinematics(s, p);
  return ee.pos + rotate(pt, ee.heading);
}

bool joint_limits_violated(const RobotState& s, const RobotParams& p) {
  for (double q : s.phi) {
    if (q < p.joint_pos_limits[0] || q > p.joint_pos_limits[1]) return true;
  }
  return false;
}

}  // namespace wbc
