#pragma once

#include <optional>
#include <random>

#include <json.hpp>

#include "h2r/env/types.hpp"

namespace h2r::env {

struct ApplyResult {
  JointState state;
  // j_{t-1} + j'_t * dt, before any saturation.
  Vec6 commanded = Vec6::Zero();
  bool hit_limit = false;
};

// Integrates joint velocities over one control step and saturates the result
// against joint speed and position limits.
ApplyResult apply_action(const Vec6& joint_velocities, const JointState& js,
                         double dt, double max_joint_speed,
                         const JointLimits& limits);

// Fixed priority: Success > Collision > JointLimit > Workspace > Timeout.
std::optional<Termination> check_termination(const Snapshot& snapshot,
                                             int step_count,
                                             const EventSet& events,
                                             const EnvConfig& config);

bool task_succeeded(const Snapshot& snapshot, double tolerance);

// Exact color+category match; ties go to the object nearest `ee`.
std::optional<int> resolve_object(const std::vector<SceneObject>& objects,
                                  const ObjectQuery& query, const Vec3& ee);

// Full static scene: enough to reproduce a reset without the RNG.
struct SceneDescription {
  Workspace workspace;
  std::vector<SceneObject> objects;
  int target_id = -1;
  int destination_id = -1;
  Vec3 goal = Vec3::Zero();
  Task task = Task::Reach;
  Vec6 joints = Vec6::Zero();
};

nlohmann::json scene_to_json(const SceneDescription& scene);
SceneDescription scene_from_json(const nlohmann::json& j);
SceneDescription describe(const Snapshot& snapshot, const Workspace& ws);

class Environment {
 public:
  explicit Environment(EnvConfig config);

  Snapshot reset(std::uint64_t seed, Task task,
                 const std::optional<TaskCommand>& command = std::nullopt);
  Snapshot reset(std::uint64_t seed) { return reset(seed, config_.task); }
  Snapshot reset_to(const SceneDescription& scene);

  StepOutcome step(const ActionCommand& action);

  const EnvConfig& config() const { return config_; }
  const Snapshot& snapshot() const { return snapshot_; }
  bool terminated() const { return terminated_; }

  // Frame origins used for sphere-based self and ground collision tests.
  std::vector<Vec3> link_centers(const Vec6& q) const;

 private:
  void resolve_target(const std::optional<TaskCommand>& command,
                      std::mt19937_64& rng);
  void update_ee();
  EventSet detect_events(bool hit_limit) const;
  void settle(SceneObject& obj) const;

  EnvConfig config_;
  Snapshot snapshot_;
  Iso3 attach_offset_ = Iso3::Identity();
  double level_sum_ = 0.0;
  bool has_reset_ = false;
  bool terminated_ = false;
};

}  // namespace h2r::env
