#include "h2r/env/environment.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "h2r/common/errors.hpp"

namespace h2r::env {
namespace {

constexpr std::array<const char*, 9> kColors = {
    "red", "green", "blue", "yellow", "brown", "white", "orange", "purple", "black"};
constexpr std::array<const char*, 3> kBoxNames = {"box", "block", "cube"};
constexpr std::array<const char*, 3> kSphereNames = {"ball", "sphere", "orange"};
constexpr std::array<const char*, 3> kCylinderNames = {"cylinder", "cup", "can"};

template <typename Array>
std::string pick(const Array& names, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, names.size() - 1);
  return names[d(rng)];
}

double yaw_of(const Quat& q) {
  const Eigen::Matrix3d R = q.toRotationMatrix();
  return std::atan2(R(1, 0), R(0, 0));
}

Quat yaw_quat(double yaw) { return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())); }

bool matches(const SceneObject& o, const ObjectQuery& q) {
  if (o.category != q.category) return false;
  for (const auto& a : q.attributes)
    if (a != o.color) return false;
  return true;
}

}  // namespace

ApplyResult apply_action(const Vec6& v, const JointState& js, double dt,
                         double max_joint_speed, const JointLimits& limits) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!v.allFinite()) throw DomainError("non-finite joint velocity command");
  ApplyResult r;
  r.commanded = js.positions + v * dt;
  const double step = max_joint_speed * dt;
  for (int i = 0; i < kNumJoints; ++i) {
    const double lo = std::max(js.positions(i) - step, limits.lower(i));
    const double hi = std::min(js.positions(i) + step, limits.upper(i));
    r.state.positions(i) = std::clamp(r.commanded(i), lo, hi);
    if (r.commanded(i) < limits.lower(i) || r.commanded(i) > limits.upper(i))
      r.hit_limit = true;
  }
  r.state.velocities = (r.state.positions - js.positions) / dt;
  return r;
}

bool task_succeeded(const Snapshot& s, double tolerance) {
  const SceneObject* target = s.find(s.target_id);
  if (!target) return false;
  switch (s.task) {
    case Task::Reach:
      return (s.ee.position - s.goal).norm() <= tolerance;
    case Task::Pick:
      return s.attached_id == s.target_id &&
             (target->pose.position - s.goal).norm() <= tolerance;
    case Task::Move:
      return (target->pose.position - s.goal).norm() <= tolerance;
    case Task::Put:
      return s.attached_id != s.target_id &&
             (target->pose.position - s.goal).norm() <= tolerance;
  }
  return false;
}

std::optional<Termination> check_termination(const Snapshot& snapshot,
                                             int step_count,
                                             const EventSet& events,
                                             const EnvConfig& config) {
  if (task_succeeded(snapshot, config.success_tolerance)) return Termination::Success;
  if (events.contains(Event::CollisionGroundOrSelf)) return Termination::Collision;
  if (events.contains(Event::JointLimit)) return Termination::JointLimit;
  if (events.contains(Event::WorkspaceViolation)) return Termination::Workspace;
  if (step_count >= config.max_steps) return Termination::Timeout;
  return std::nullopt;
}

std::optional<int> resolve_object(const std::vector<SceneObject>& objects,
                                  const ObjectQuery& query, const Vec3& ee) {
  std::optional<int> best;
  double best_dist = 0.0;
  for (const auto& o : objects) {
    if (!matches(o, query)) continue;
    const double d = (o.pose.position - ee).norm();
    if (!best || d < best_dist) {
      best = o.id;
      best_dist = d;
    }
  }
  return best;
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  level_sum_ = config_.home(1) + config_.home(2) + config_.home(3);
}

std::vector<Vec3> Environment::link_centers(const Vec6& q) const {
  const auto frames = chain_frames(config_.chain, q);
  std::vector<Vec3> out;
  out.reserve(frames.size() - 1);
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) out.push_back(frames[i].translation());
  return out;
}

void Environment::update_ee() {
  const Iso3 tip = forward_kinematics(config_.chain, config_.limits,
                                      snapshot_.joints.positions);
  snapshot_.ee = Pose::from_isometry(tip);
}

Snapshot Environment::reset(std::uint64_t seed, Task task,
                            const std::optional<TaskCommand>& command) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  snapshot_ = Snapshot{};
  snapshot_.task = task;
  attach_offset_ = Iso3::Identity();

  Vec6 q = config_.home;
  for (int i = 0; i < kNumJoints; ++i) {
    if (config_.active[i] && config_.home_jitter > 0.0)
      q(i) += uniform(-config_.home_jitter, config_.home_jitter);
  }
  if (config_.wrist_leveling) q(3) = level_sum_ - q(1) - q(2);
  for (int i = 0; i < kNumJoints; ++i)
    q(i) = std::clamp(q(i), config_.limits.lower(i), config_.limits.upper(i));
  snapshot_.joints.positions = q;
  snapshot_.joints.velocities.setZero();
  update_ee();

  const Workspace& ws = config_.workspace;
  const double m = config_.spawn_margin;
  const int count = task == Task::Put ? std::max(2, config_.object_count)
                                      : config_.object_count;
  const auto overlaps = [&](const Vec3& p, double r) {
    for (const auto& o : snapshot_.objects) {
      const double d = (o.pose.position.head<2>() - p.head<2>()).norm();
      if (d < o.shape.footprint_radius() + r + 0.01) return true;
    }
    return false;
  };
  const auto place = [&](double radius) -> Vec3 {
    for (int attempt = 0; attempt < config_.placement_retries; ++attempt) {
      const Vec3 p(uniform(ws.x_min + m, ws.x_max - m), uniform(ws.y_min + m, ws.y_max - m), 0.0);
      if (!overlaps(p, radius)) return p;
    }
    throw ConfigError("cannot place " + std::to_string(count) +
                          " non-overlapping objects in the workspace",
                      "/env/object_count");
  };

  for (int i = 0; i < count; ++i) {
    SceneObject obj;
    obj.id = i;
    if (task == Task::Put && i == count - 1) {
      obj.shape = {ShapeKind::Cylinder, Vec3(config_.container_radius, config_.container_height, 0.0)};
      obj.category = "bowl";
    } else {
      const double lo = config_.min_object_size, hi = config_.max_object_size;
      const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
      if (kind == 0) {
        obj.shape = {ShapeKind::Box, Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi))};
        obj.category = pick(kBoxNames, rng);
      } else if (kind == 1) {
        obj.shape = {ShapeKind::Sphere, Vec3(0.5 * uniform(lo, hi), 0.0, 0.0)};
        obj.category = pick(kSphereNames, rng);
      } else {
        obj.shape = {ShapeKind::Cylinder, Vec3(0.5 * uniform(lo, hi), uniform(lo, hi), 0.0)};
        obj.category = pick(kCylinderNames, rng);
      }
    }
    obj.color = pick(kColors, rng);
    Vec3 p = place(obj.shape.footprint_radius());
    p.z() = ws.z0 + obj.shape.half_height();
    obj.pose.position = p;
    obj.pose.orientation = yaw_quat(uniform(-M_PI, M_PI));
    snapshot_.objects.push_back(obj);
  }

  resolve_target(command, rng);

  SceneObject& target = snapshot_.objects[snapshot_.target_id];
  switch (task) {
    case Task::Reach:
      snapshot_.goal = target.grasp_point();
      break;
    case Task::Pick:
      snapshot_.goal = target.pose.position + Vec3(0.0, 0.0, config_.lift_height);
      break;
    case Task::Move: {
      const double r = target.shape.footprint_radius();
      Vec3 g = Vec3::Zero();
      for (int attempt = 0;; ++attempt) {
        if (attempt >= config_.placement_retries)
          throw ConfigError("cannot place move goal", "/env/object_count");
        g = Vec3(uniform(ws.x_min + m, ws.x_max - m), uniform(ws.y_min + m, ws.y_max - m), 0.0);
        if ((g.head<2>() - target.pose.position.head<2>()).norm() >= 0.1 && !overlaps(g, r)) break;
      }
      g.z() = ws.z0 + target.shape.half_height();
      snapshot_.goal = g;
      break;
    }
    case Task::Put: {
      const SceneObject& dest = snapshot_.objects[snapshot_.destination_id];
      snapshot_.goal = dest.grasp_point() + Vec3(0.0, 0.0, target.shape.half_height());
      break;
    }
  }

  has_reset_ = true;
  terminated_ = false;
  return snapshot_;
}

void Environment::resolve_target(const std::optional<TaskCommand>& command,
                                 std::mt19937_64& rng) {
  auto& objects = snapshot_.objects;
  const bool put = snapshot_.task == Task::Put;
  const int movable = put ? static_cast<int>(objects.size()) - 1
                          : static_cast<int>(objects.size());
  if (put) snapshot_.destination_id = objects.back().id;

  if (!command) {
    snapshot_.target_id = std::uniform_int_distribution<int>(0, movable - 1)(rng);
    return;
  }
  const Vec3 ee = snapshot_.ee.position;
  std::vector<SceneObject> candidates(objects.begin(), objects.begin() + movable);
  if (auto id = resolve_object(candidates, command->target, ee)) {
    snapshot_.target_id = *id;
  } else {
    // The scene is generated for the command: relabel a random movable object.
    const int pick = std::uniform_int_distribution<int>(0, movable - 1)(rng);
    objects[pick].category = command->target.category;
    if (!command->target.attributes.empty()) objects[pick].color = command->target.attributes.front();
    snapshot_.target_id = pick;
  }
  if (put && command->destination) {
    SceneObject& dest = objects.back();
    if (!matches(dest, *command->destination)) {
      dest.category = command->destination->category;
      if (!command->destination->attributes.empty())
        dest.color = command->destination->attributes.front();
    }
  }
}

Snapshot Environment::reset_to(const SceneDescription& scene) {
  if (!scene.workspace.valid()) throw ConfigError("degenerate workspace", "/workspace");
  config_.workspace = scene.workspace;
  snapshot_ = Snapshot{};
  snapshot_.task = scene.task;
  snapshot_.objects = scene.objects;
  snapshot_.target_id = scene.target_id;
  snapshot_.destination_id = scene.destination_id;
  snapshot_.goal = scene.goal;
  snapshot_.joints.positions = scene.joints;
  if (!snapshot_.find(scene.target_id)) throw ConfigError("target id not in scene", "/target");
  for (const auto& o : snapshot_.objects)
    if (!o.shape.valid()) throw ConfigError("object dims must be positive", "/objects");
  update_ee();
  attach_offset_ = Iso3::Identity();
  for (auto& o : snapshot_.objects) o.attached = false;
  has_reset_ = true;
  terminated_ = false;
  return snapshot_;
}

void Environment::settle(SceneObject& obj) const {
  double support = config_.workspace.z0;
  for (const auto& other : snapshot_.objects) {
    if (other.id == obj.id) continue;
    const double d = (other.pose.position.head<2>() - obj.pose.position.head<2>()).norm();
    if (d < other.shape.footprint_radius() + obj.shape.footprint_radius() &&
        other.pose.position.z() < obj.pose.position.z()) {
      support = std::max(support, other.pose.position.z() + other.shape.half_height());
    }
  }
  obj.pose.orientation = yaw_quat(yaw_of(obj.pose.orientation));
  obj.pose.position.z() = support + obj.shape.half_height();
}

EventSet Environment::detect_events(bool hit_limit) const {
  EventSet events;
  const double z0 = config_.workspace.z0;
  const double r = config_.link_radius;
  const Vec3 tip = snapshot_.ee.position;

  const auto centers = link_centers(snapshot_.joints.positions);
  bool ground_or_self = tip.z() < z0;
  for (std::size_t i = 2; i < centers.size(); ++i)
    if (centers[i].z() - r < z0) ground_or_self = true;
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 3; j < centers.size(); ++j)
      if ((centers[i] - centers[j]).norm() < 2.0 * r) ground_or_self = true;
  if (ground_or_self) events.insert(Event::CollisionGroundOrSelf);

  const SceneObject* held = snapshot_.find(snapshot_.attached_id);
  for (const auto& o : snapshot_.objects) {
    if (o.attached) continue;
    const Vec3 local = o.pose.orientation.conjugate() * (tip - o.pose.position);
    bool hit = o.shape.contains(local);
    if (held) {
      const double d = (held->pose.position.head<2>() - o.pose.position.head<2>()).norm();
      const double dz = std::abs(held->pose.position.z() - o.pose.position.z());
      if (d < held->shape.footprint_radius() + o.shape.footprint_radius() &&
          dz < held->shape.half_height() + o.shape.half_height())
        hit = true;
    }
    if (hit) {
      events.insert(Event::CollisionObject);
      break;
    }
  }

  if (hit_limit) events.insert(Event::JointLimit);

  const Workspace& ws = config_.workspace;
  bool outside = !ws.contains_xy(tip);
  if (const SceneObject* t = snapshot_.find(snapshot_.target_id); t && !ws.contains_xy(t->pose.position))
    outside = true;
  if (held && !ws.contains_xy(held->pose.position)) outside = true;
  if (outside) events.insert(Event::WorkspaceViolation);
  return events;
}

StepOutcome Environment::step(const ActionCommand& action) {
  if (!has_reset_) throw StateError("step() before reset()");
  if (terminated_) throw StateError("step() after episode termination");
  if (!action.joint_velocities.allFinite() || !std::isfinite(action.suction))
    throw DomainError("non-finite action");

  Vec6 v = action.joint_velocities;
  for (int i = 0; i < kNumJoints; ++i)
    if (!config_.active[i]) v(i) = 0.0;
  if (config_.wrist_leveling) v(3) = -(v(1) + v(2));

  const JointState prev = snapshot_.joints;
  ApplyResult applied = apply_action(v, prev, config_.dt, config_.max_joint_speed, config_.limits);
  if (config_.wrist_leveling) {
    Vec6& q = applied.state.positions;
    q(3) = std::clamp(level_sum_ - q(1) - q(2), config_.limits.lower(3), config_.limits.upper(3));
    applied.state.velocities(3) = (q(3) - prev.positions(3)) / config_.dt;
  }
  snapshot_.joints = applied.state;
  update_ee();
  const Iso3 ee = snapshot_.ee.isometry();

  for (auto& o : snapshot_.objects) {
    if (o.attached) o.pose = Pose::from_isometry(ee * attach_offset_);
  }

  const bool suction_on = action.suction > 0.5;
  if (snapshot_.attached_id >= 0 && !suction_on) {
    for (auto& o : snapshot_.objects) {
      if (o.id != snapshot_.attached_id) continue;
      o.attached = false;
      settle(o);
    }
    snapshot_.attached_id = -1;
  } else if (snapshot_.attached_id < 0 && suction_on) {
    SceneObject* best = nullptr;
    double best_d = config_.contact_radius;
    for (auto& o : snapshot_.objects) {
      const double d = (o.grasp_point() - snapshot_.ee.position).norm();
      if (d <= best_d) {
        best = &o;
        best_d = d;
      }
    }
    if (best) {
      best->attached = true;
      snapshot_.attached_id = best->id;
      attach_offset_ = ee.inverse() * best->pose.isometry();
    }
  }
  snapshot_.suction_contact = snapshot_.attached_id >= 0;

  StepOutcome out;
  out.events = detect_events(applied.hit_limit);
  snapshot_.step += 1;
  out.termination = check_termination(snapshot_, snapshot_.step, out.events, config_);
  if (out.termination) terminated_ = true;
  out.snapshot = snapshot_;
  return out;
}

SceneDescription describe(const Snapshot& s, const Workspace& ws) {
  SceneDescription d;
  d.workspace = ws;
  d.objects = s.objects;
  d.target_id = s.target_id;
  d.destination_id = s.destination_id;
  d.goal = s.goal;
  d.task = s.task;
  d.joints = s.joints.positions;
  return d;
}

}  // namespace h2r::env
