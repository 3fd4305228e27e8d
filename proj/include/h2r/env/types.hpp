#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "h2r/common/types.hpp"
#include "h2r/env/kinematics.hpp"

namespace h2r::env {

struct JointState {
  Vec6 positions = Vec6::Zero();
  Vec6 velocities = Vec6::Zero();
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Iso3 isometry() const {
    Iso3 T = Iso3::Identity();
    T.linear() = orientation.toRotationMatrix();
    T.translation() = position;
    return T;
  }
  static Pose from_isometry(const Iso3& T) {
    Pose p;
    p.position = T.translation();
    p.orientation = Quat(T.rotation()).normalized();
    return p;
  }
};

enum class ShapeKind { Sphere, Box, Cylinder };

// dims: sphere (r), box (w, d, h), cylinder (r, h). Unused slots are zero.
struct Shape {
  ShapeKind kind = ShapeKind::Box;
  Vec3 dims = Vec3::Constant(0.02);

  double half_height() const;
  // Radius of the smallest vertical cylinder enclosing the shape.
  double footprint_radius() const;
  // Point in the object's local frame (origin at the geometric center).
  bool contains(const Vec3& local) const;
  bool valid() const;
};

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& s);

struct SceneObject {
  int id = 0;
  Pose pose;
  Shape shape;
  std::string color;
  std::string category;
  bool attached = false;

  // Center of the top face, where the suction cup makes contact.
  Vec3 grasp_point() const;
};

struct Workspace {
  double x_min = 0.15;
  double x_max = 0.75;
  double y_min = -0.30;
  double y_max = 0.30;
  double z0 = 0.0;

  bool contains_xy(const Vec3& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
  // Closest point of the workspace rectangle boundary to p (same z).
  Vec3 nearest_boundary_point(const Vec3& p) const;
  bool valid() const { return x_max > x_min && y_max > y_min; }
};

enum class Task { Reach, Pick, Move, Put };
std::string to_string(Task task);
Task task_from_string(const std::string& s);

// Attribute/category query used to resolve a commanded object.
struct ObjectQuery {
  std::vector<std::string> attributes;
  std::string category;
};

struct TaskCommand {
  ObjectQuery target;
  std::optional<ObjectQuery> destination;
};

struct EnvConfig {
  double dt = 0.05;
  int max_steps = 100;
  double success_tolerance = 0.02;
  double max_joint_speed = 1.0;
  double contact_radius = 0.015;
  double link_radius = 0.04;
  double lift_height = 0.05;
  double home_jitter = 0.05;
  double spawn_margin = 0.05;
  double min_object_size = 0.015;
  double max_object_size = 0.03;
  double container_radius = 0.04;
  double container_height = 0.02;
  int object_count = 6;
  int placement_retries = 2000;
  std::uint64_t seed = 0;
  Task task = Task::Reach;
  ChainParams chain = default_chain();
  JointLimits limits = default_limits();
  Vec6 home = (Vec6() << M_PI, -2.0, 2.0, -M_PI / 2, -M_PI / 2, 0.0).finished();
  std::array<bool, 6> active{true, true, true, true, true, true};
  // Slave joint 4 so that joints 2..4 sum to a constant: the tool keeps its
  // home orientation, as on a parallelogram-linkage arm.
  bool wrist_leveling = false;
  Workspace workspace;

  void validate() const;
};

// The reduced arm used for desk-scale training: base, shoulder, elbow active,
// wrist levelled, a single object.
EnvConfig simplified_3dof_config();

enum class Event : std::uint8_t {
  CollisionGroundOrSelf = 1,
  CollisionObject = 2,
  JointLimit = 4,
  WorkspaceViolation = 8,
};

class EventSet {
 public:
  void insert(Event e) { bits_ |= static_cast<std::uint8_t>(e); }
  bool contains(Event e) const { return bits_ & static_cast<std::uint8_t>(e); }
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }
  std::vector<std::string> names() const;
  friend bool operator==(const EventSet&, const EventSet&) = default;

 private:
  std::uint8_t bits_ = 0;
};

enum class Termination { Success, Collision, JointLimit, Workspace, Timeout };
std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct Snapshot {
  JointState joints;
  Pose ee;
  std::vector<SceneObject> objects;
  bool suction_contact = false;
  int attached_id = -1;
  int target_id = -1;
  int destination_id = -1;
  Vec3 goal = Vec3::Zero();
  Task task = Task::Reach;
  int step = 0;

  const SceneObject* find(int id) const;
  const SceneObject& target() const;
  // The point whose distance to `goal` decides success: the tool tip for
  // Reach, the target object center otherwise.
  Vec3 tracked_point() const;
};

struct StepOutcome {
  Snapshot snapshot;
  EventSet events;
  std::optional<Termination> termination;
};

// Joint velocities in rad/s and a suction signal in [0, 1].
struct ActionCommand {
  Vec6 joint_velocities = Vec6::Zero();
  double suction = 0.0;
};

}  // namespace h2r::env
