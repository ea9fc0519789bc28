#pragma once

#include <array>
#include <cmath>

namespace wbc {

enum class Termination { kNone, kCollision, kJointLimit, kHoldSuccess, kTimeout };

struct RewardParams {
  double w_t = -15.0;
  double t_timeout = 120.0;  // s
  double w_pd = -10.0;
  double w_pt = 30.0;
  double w_sm = -1.0;
  double d_th = 0.3;  // m
  double w_ht = 20.0;
  double w_hd = 40.0;
  double t_hold = 1.5;  // s
  double tau = 0.04;    // s
  double d_collision = -60.0;
  double d_joint_limit = -20.0;
  double d_hold_success = 10.0;
  // Measure the safety-margin clearance for the base only (matches the
  // platform text); false includes the arm links.
  bool safety_margin_base_only = true;
  // Path-deviation term uses the signed per-step change of deviation; false
  // switches to penalizing the absolute deviation per step (times tau).
  bool deviation_signed = true;

  int hold_steps() const { return static_cast<int>(std::ceil(t_hold / tau)); }
  int timeout_steps() const { return static_cast<int>(std::round(t_timeout / tau)); }
};

struct StepContext {
  double delta_deviation = 0.0;  // signed per-step change of path deviation (m)
  double deviation = 0.0;        // current deviation (m), used by the absolute variant
  double delta_progress = 0.0;   // per-step progress along the path (m)
  double d_pt_init = 1.0;        // total reference path length (m)
  double speed = 0.0;            // base linear speed (m/s)
  double d_sm = 0.0;             // min clearance (m)
  double d_g = 0.0;              // EE-to-goal distance (m)
  double d_h = 0.0;              // current tolerance sphere radius (m)
  bool in_sphere = false;
  Termination termination = Termination::kNone;
  double i_h_prev = 0.0;  // holding reward accumulated so far
};

// Per-step reward decomposition, one slot per term.
struct RewardTerms {
  double time = 0.0;
  double path_deviation = 0.0;
  double path_progress = 0.0;
  double safety_margin = 0.0;
  double holding = 0.0;
  double terminal = 0.0;
  double hold_revoked = 0.0;

  double total() const {
    return time + path_deviation + path_progress + safety_margin + holding + terminal + hold_revoked;
  }
};

struct StepReward {
  double r = 0.0;
  double i_h_new = 0.0;
  RewardTerms terms;
};

// L(x, y) = 1 - min(1, x/y); linear ramp from 1 at x=0 to 0 at x>=y.
double shaping(double x, double y);

StepReward step_reward(const StepContext& ctx, const RewardParams& p);

}  // namespace wbc
