#pragma once

#include <random>

#include "h2r/common/types.hpp"
#include "h2r/env/types.hpp"

namespace h2r::agentio {

// Offsets of each field inside the 37-dimensional observation.
namespace layout {
inline constexpr int kJoints = 0;          // 6
inline constexpr int kJointVel = 6;        // 6
inline constexpr int kObjectQuat = 12;     // 4, (w, x, y, z)
inline constexpr int kEeToObject = 16;     // 3
inline constexpr int kObjectToGoal = 19;   // 3
inline constexpr int kObjectPos = 22;      // 3
inline constexpr int kGoalPos = 25;        // 3
inline constexpr int kSuction = 28;        // 2: contact state, commanded suction
inline constexpr int kPrevAction = 30;     // 7
inline constexpr int kSize = 37;
static_assert(kPrevAction + kActionDim == kSize);
static_assert(kSize == kStateDim);
}  // namespace layout

struct RawObservation {
  StateVec values = StateVec::Zero();

  auto joints() const { return values.segment<6>(layout::kJoints); }
  auto joint_velocities() const { return values.segment<6>(layout::kJointVel); }
  auto object_quat() const { return values.segment<4>(layout::kObjectQuat); }
  auto ee_to_object() const { return values.segment<3>(layout::kEeToObject); }
  auto object_to_goal() const { return values.segment<3>(layout::kObjectToGoal); }
  auto object_position() const { return values.segment<3>(layout::kObjectPos); }
  auto goal_position() const { return values.segment<3>(layout::kGoalPos); }
  auto suction() const { return values.segment<2>(layout::kSuction); }
  auto prev_action() const { return values.segment<7>(layout::kPrevAction); }
};

// Builds the observation from an environment snapshot. The end-effector to
// object vector points from the tool tip to the object's grasp point.
RawObservation assemble_state(const env::Snapshot& snapshot, const ActionVec& prev_action);

struct NoiseWidths {
  double position = 0.005;
  double velocity = 0.05;

  static NoiseWidths none() { return {0.0, 0.0}; }
};

// Additive uniform noise on every field except the previous action.
RawObservation inject_noise(const RawObservation& obs, std::mt19937_64& rng,
                            const NoiseWidths& widths = {});

}  // namespace h2r::agentio
