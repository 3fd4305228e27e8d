#include "h2r/agentio/observation.hpp"

#include "h2r/common/errors.hpp"

namespace h2r::agentio {

RawObservation assemble_state(const env::Snapshot& s, const ActionVec& prev_action) {
  const env::SceneObject* target = s.find(s.target_id);
  if (!target) throw StateError("snapshot has no target object");
  RawObservation obs;
  auto& v = obs.values;
  const Vec3 p_e = s.ee.position;
  const Vec3 p_o = target->pose.position;
  const Quat& q = target->pose.orientation;
  v.segment<6>(layout::kJoints) = s.joints.positions;
  v.segment<6>(layout::kJointVel) = s.joints.velocities;
  v.segment<4>(layout::kObjectQuat) << q.w(), q.x(), q.y(), q.z();
  v.segment<3>(layout::kEeToObject) = target->grasp_point() - p_e;
  v.segment<3>(layout::kObjectToGoal) = s.goal - p_o;
  v.segment<3>(layout::kObjectPos) = p_o;
  v.segment<3>(layout::kGoalPos) = s.goal;
  v(layout::kSuction) = s.suction_contact ? 1.0 : 0.0;
  v(layout::kSuction + 1) = prev_action(6) > 0.5 ? 1.0 : 0.0;
  v.segment<7>(layout::kPrevAction) = prev_action;
  return obs;
}

RawObservation inject_noise(const RawObservation& obs, std::mt19937_64& rng,
                            const NoiseWidths& widths) {
  RawObservation out = obs;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < layout::kPrevAction; ++i) {
    const bool velocity = i >= layout::kJointVel && i < layout::kObjectQuat;
    const double w = velocity ? widths.velocity : widths.position;
    const double u = unit(rng);
    if (w > 0.0) out.values(i) += w * u;
  }
  return out;
}

}  // namespace h2r::agentio
