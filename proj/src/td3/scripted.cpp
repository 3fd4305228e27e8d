#include "h2r/td3/scripted.hpp"

#include <algorithm>

namespace h2r::td3 {

Vec6 ScriptedPolicy::track(const Vec6& q, const Vec3& target) const {
  const auto tip = [&](const Vec6& x) -> Vec3 { return env::chain_frames(config_.chain, VecX(x)).back().translation(); };
  const Vec3 p = tip(q);
  const double h = 1e-6;
  std::vector<int> cols;
  for (int i = 0; i < kNumJoints; ++i) {
    if (!config_.active[i]) continue;
    if (config_.wrist_leveling && i == 3) continue;
    cols.push_back(i);
  }
  Eigen::Matrix<double, 3, Eigen::Dynamic> J(3, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    Vec6 dq = Vec6::Zero();
    dq(cols[c]) = h;
    if (config_.wrist_leveling && (cols[c] == 1 || cols[c] == 2)) dq(3) = -h;
    J.col(c) = (tip(q + dq) - p) / h;
  }
  const Vec3 err = gain_ * (target - p);
  const double lambda = 1e-3;
  const Eigen::Matrix3d JJt = J * J.transpose() + lambda * Eigen::Matrix3d::Identity();
  const VecX w = J.transpose() * JJt.ldlt().solve(err);
  Vec6 v = Vec6::Zero();
  for (std::size_t c = 0; c < cols.size(); ++c) v(cols[c]) = w(c);
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak > config_.max_joint_speed) v *= config_.max_joint_speed / peak;
  return v;
}

ActionVec ScriptedPolicy::operator()(const env::Snapshot& s, const ActionVec& prev) const {
  const env::SceneObject& target = s.target();
  const Vec3 grasp = target.grasp_point();
  Vec3 aim = s.goal;
  double suction = 0.0;
  switch (s.task) {
    case env::Task::Reach:
      aim = s.goal;
      break;
    case env::Task::Pick:
    case env::Task::Move:
    case env::Task::Put:
      if (s.attached_id == s.target_id) {
        suction = 1.0;
        const Vec3 offset = s.ee.position - target.pose.position;
        aim = s.goal + offset;
        // Lift before travelling sideways, and release once on the goal.
        const double lateral = (target.pose.position - s.goal).head<2>().norm();
        if (s.task != env::Task::Pick && lateral > 0.01)
          aim.z() = std::max(aim.z(), s.goal.z() + offset.z() + 0.06);
        if (s.task == env::Task::Put && (target.pose.position - s.goal).norm() < 0.5 * config_.success_tolerance)
          suction = 0.0;
      } else {
        const double lateral = (s.ee.position - grasp).head<2>().norm();
        aim = grasp;
        if (lateral > 0.01) aim.z() += 0.05;
        suction = (s.ee.position - grasp).norm() < 0.5 * config_.contact_radius ? 1.0 : 0.0;
      }
      break;
  }
  const Vec6 v = track(s.joints.positions, aim);
  ActionVec a;
  a.head<6>() = v / config_.max_joint_speed;
  a(6) = suction;
  return a;
}

}  // namespace h2r::td3
