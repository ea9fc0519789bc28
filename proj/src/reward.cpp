#include "wbc/reward.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace wbc {

double shaping(double x, double y) {
  assert(y > 0.0 && x >= 0.0);
  return 1.0 - std::min(1.0, x / y);
}

StepReward step_reward(const StepContext& ctx, const RewardParams& p) {
  StepReward out;
  out.terms.time = p.w_t * p.tau / p.t_timeout;
  out.terms.path_deviation =
      p.deviation_signed ? p.w_pd * ctx.delta_deviation : p.w_pd * ctx.deviation * p.tau;
  out.terms.path_progress = p.w_pt * ctx.delta_progress / ctx.d_pt_init;
  out.terms.safety_margin = p.w_sm * ctx.speed * p.tau * shaping(ctx.d_sm, p.d_th);

  out.i_h_new = ctx.i_h_prev;
  if (ctx.in_sphere) {
    double hold = (p.w_ht + p.w_hd * shaping(ctx.d_g, ctx.d_h)) * p.tau / p.t_hold;
    out.terms.holding = hold;
    out.i_h_new += hold;
  } else if (ctx.i_h_prev > 0.0) {
    // Leaving the sphere revokes everything accumulated inside it.
    out.terms.hold_revoked = -ctx.i_h_prev;
    out.i_h_new = 0.0;
  }

  switch (ctx.termination) {
    case Termination::kCollision:
      out.terms.terminal = p.d_collision;
      break;
    case Termination::kJointLimit:
      out.terms.terminal = p.d_joint_limit;
      break;
    case Termination::kHoldSuccess:
      out.terms.terminal = p.d_hold_success;
      break;
    case Termination::kTimeout:
    case Termination::kNone:
      break;
  }
  out.r = out.terms.total();
  return out;
}

}  // namespace wbc
