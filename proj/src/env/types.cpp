#include "h2r/env/types.hpp"

#include <algorithm>
#include <cmath>

#include "h2r/common/errors.hpp"

namespace h2r::env {

double Shape::half_height() const {
  switch (kind) {
    case ShapeKind::Sphere:
      return dims(0);
    case ShapeKind::Box:
      return 0.5 * dims(2);
    case ShapeKind::Cylinder:
      return 0.5 * dims(1);
  }
  return 0.0;
}

double Shape::footprint_radius() const {
  switch (kind) {
    case ShapeKind::Sphere:
    case ShapeKind::Cylinder:
      return dims(0);
    case ShapeKind::Box:
      return 0.5 * std::hypot(dims(0), dims(1));
  }
  return 0.0;
}

bool Shape::contains(const Vec3& p) const {
  switch (kind) {
    case ShapeKind::Sphere:
      return p.norm() <= dims(0);
    case ShapeKind::Box:
      return std::abs(p.x()) <= 0.5 * dims(0) &&
             std::abs(p.y()) <= 0.5 * dims(1) &&
             std::abs(p.z()) <= 0.5 * dims(2);
    case ShapeKind::Cylinder:
      return std::hypot(p.x(), p.y()) <= dims(0) &&
             std::abs(p.z()) <= 0.5 * dims(1);
  }
  return false;
}

bool Shape::valid() const {
  switch (kind) {
    case ShapeKind::Sphere:
      return dims(0) > 0.0;
    case ShapeKind::Box:
      return (dims.array() > 0.0).all();
    case ShapeKind::Cylinder:
      return dims(0) > 0.0 && dims(1) > 0.0;
  }
  return false;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere:
      return "sphere";
    case ShapeKind::Box:
      return "box";
    case ShapeKind::Cylinder:
      return "cylinder";
  }
  return "?";
}

ShapeKind shape_kind_from_string(const std::string& s) {
  if (s == "sphere") return ShapeKind::Sphere;
  if (s == "box") return ShapeKind::Box;
  if (s == "cylinder") return ShapeKind::Cylinder;
  throw ConfigError("unknown shape '" + s + "'");
}

Vec3 SceneObject::grasp_point() const {
  const Vec3 up = pose.orientation * Vec3::UnitZ();
  return pose.position + shape.half_height() * up;
}

Vec3 Workspace::nearest_boundary_point(const Vec3& p) const {
  Vec3 q = p;
  if (!contains_xy(p)) {
    q.x() = std::clamp(p.x(), x_min, x_max);
    q.y() = std::clamp(p.y(), y_min, y_max);
    return q;
  }
  // Inside: project onto the closest edge.
  const double dx0 = p.x() - x_min, dx1 = x_max - p.x();
  const double dy0 = p.y() - y_min, dy1 = y_max - p.y();
  const double m = std::min({dx0, dx1, dy0, dy1});
  if (m == dx0) q.x() = x_min;
  else if (m == dx1) q.x() = x_max;
  else if (m == dy0) q.y() = y_min;
  else q.y() = y_max;
  return q;
}

std::string to_string(Task task) {
  switch (task) {
    case Task::Reach:
      return "reach";
    case Task::Pick:
      return "pick";
    case Task::Move:
      return "move";
    case Task::Put:
      return "put";
  }
  return "?";
}

Task task_from_string(const std::string& s) {
  if (s == "reach" || s == "touch") return Task::Reach;
  if (s == "pick") return Task::Pick;
  if (s == "move") return Task::Move;
  if (s == "put") return Task::Put;
  throw ConfigError("unknown task '" + s + "'");
}

void EnvConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("must be > 0", "/env/dt");
  if (max_steps < 1) throw ConfigError("must be >= 1", "/env/max_steps");
  if (!(success_tolerance > 0.0))
    throw ConfigError("must be > 0", "/env/success_tolerance");
  if (!(max_joint_speed > 0.0))
    throw ConfigError("must be > 0", "/env/max_joint_speed");
  if (!(contact_radius > 0.0))
    throw ConfigError("must be > 0", "/env/contact_radius");
  if (object_count < 1) throw ConfigError("must be >= 1", "/env/object_count");
  if (!(min_object_size > 0.0) || max_object_size < min_object_size)
    throw ConfigError("invalid object size range", "/env/max_object_size");
  if (!workspace.valid()) throw ConfigError("degenerate", "/env/workspace");
  if (chain.dof() != kNumJoints)
    throw ConfigError("chain must have 6 joints", "/env/chain");
  if (limits.lower.size() != kNumJoints || limits.upper.size() != kNumJoints ||
      !(limits.lower.array() <= limits.upper.array()).all())
    throw ConfigError("invalid joint limits", "/env/limits");
  if (!limits.contains(VecX(home))) throw ConfigError("home outside limits", "/env/home");
}

EnvConfig simplified_3dof_config() {
  EnvConfig c;
  c.active = {true, true, true, false, false, false};
  c.wrist_leveling = true;
  c.object_count = 1;
  // Tool tip at (0.45, 0, 0.2), above the middle of the table.
  c.home << 2.840857734, -1.528420079, 2.178946578, -2.221322826, -M_PI / 2, 0.0;
  return c;
}

std::vector<std::string> EventSet::names() const {
  std::vector<std::string> out;
  if (contains(Event::CollisionGroundOrSelf)) out.emplace_back("collision_ground_or_self");
  if (contains(Event::CollisionObject)) out.emplace_back("collision_object");
  if (contains(Event::JointLimit)) out.emplace_back("joint_limit");
  if (contains(Event::WorkspaceViolation)) out.emplace_back("workspace_violation");
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Success:
      return "success";
    case Termination::Collision:
      return "collision";
    case Termination::JointLimit:
      return "joint_limit";
    case Termination::Workspace:
      return "workspace";
    case Termination::Timeout:
      return "timeout";
  }
  return "?";
}

Termination termination_from_string(const std::string& s) {
  if (s == "success") return Termination::Success;
  if (s == "collision") return Termination::Collision;
  if (s == "joint_limit") return Termination::JointLimit;
  if (s == "workspace") return Termination::Workspace;
  if (s == "timeout") return Termination::Timeout;
  throw ConfigError("unknown termination '" + s + "'");
}

const SceneObject* Snapshot::find(int id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const SceneObject& Snapshot::target() const {
  const SceneObject* o = find(target_id);
  if (!o) throw StateError("snapshot has no target object");
  return *o;
}

Vec3 Snapshot::tracked_point() const {
  if (task == Task::Reach) return ee.position;
  return target().pose.position;
}

}  // namespace h2r::env
