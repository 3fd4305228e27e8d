#include "h2r/reward/engine.hpp"

#include "h2r/common/errors.hpp"
#include "h2r/env/kinematics.hpp"

namespace h2r::reward {

void RewardWeights::validate() const {
  const double all[] = {w0, w1, w2, w3, w4, w5, w6, w7, w0_final,
                        collision, step_limit, ee_inclination, object_inclination, workspace};
  for (double v : all)
    if (!(v >= 0.0)) throw ConfigError("weights must be >= 0", "/reward/weights");
  if (w0_final > w0) throw ConfigError("w0 must not increase over training", "/reward/weights/w0_final");
}

void RewardScales::validate() const {
  const double all[] = {lambda0, lambda1, lambda2, lambda3, lambda4, lambda5, sigma1, eps_t, divisor};
  for (double v : all)
    if (!(v > 0.0)) throw ConfigError("scales must be > 0", "/reward/scales");
  if (lambda3 < 5.0 * lambda4)
    throw ConfigError("lambda3 must be at least 5 * lambda4", "/reward/scales/lambda3");
}

RewardEngine::RewardEngine(RewardWeights weights, RewardScales scales)
    : weights_(weights), scales_(scales) {
  weights_.validate();
  scales_.validate();
}

RewardBreakdown RewardEngine::evaluate(const StepContext& ctx) {
  const env::Snapshot& s = ctx.curr;
  const env::SceneObject& target = s.target();
  const env::SceneObject& target_prev = ctx.prev.target();
  const Vec3 p_e = s.ee.position;
  const Vec3 p_o = target.pose.position;
  const Vec3& p_g = s.goal;
  const Eigen::Matrix3d R_e = s.ee.orientation.toRotationMatrix();
  const double psi_e = env::roll_of(R_e);
  const double theta_e = env::pitch_of(R_e);
  const Eigen::Matrix3d R_o = target.pose.orientation.toRotationMatrix();

  RewardBreakdown b;
  b.r_e = approach_reward<double>(p_e, target.grasp_point(), psi_e, theta_e, weights_, scales_);
  b.r_i = interaction_reward<double>(p_o, p_g, s.attached_id == s.target_id, weights_, scales_);
  const Vec3 to_goal = p_g - p_o;
  if (to_goal.norm() > 1e-9) {
    const Vec3 v_o = (p_o - target_prev.pose.position) / ctx.dt;
    b.r_a = alignment_reward<double>(v_o, to_goal.normalized(), weights_, scales_);
  }
  b.c_c = weights_.collision * collision_penalty(collision_kind(ctx.events));
  b.c_s = weights_.step_limit * step_limit_penalty(s.step, ctx.max_steps);
  b.c_e = weights_.ee_inclination * ee_inclination_penalty(psi_e, theta_e, weights_.w6);
  b.c_a = action_smoothness_penalty(ctx.action, ctx.prev_action, ctx.prev_action2, weights_.w7);
  b.c_o = weights_.object_inclination *
          object_inclination_penalty(env::signed_roll_of(R_o), env::pitch_of(R_o), scales_);
  b.c_w = weights_.workspace * workspace_penalty(p_o, p_e, ctx.workspace, scales_.sigma1);
  b.total = total_reward(b, scales_);

  if (ctx.termination == env::Termination::Success) b = success_override(last_, b, weights_, scales_);
  last_ = b;
  return b;
}

}  // namespace h2r::reward
