#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "h2r/common/errors.hpp"
#include "h2r/common/types.hpp"

namespace h2r::env {

// Standard Denavit-Hartenberg parameters of one revolute joint.
struct DhLink {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
};

struct JointLimits {
  VecX lower;
  VecX upper;

  bool contains(const VecX& q) const {
    return q.size() == lower.size() && (q.array() >= lower.array()).all() &&
           (q.array() <= upper.array()).all();
  }
};

struct ChainParams {
  std::vector<DhLink> links;
  Iso3 base = Iso3::Identity();
  // Distance from the last joint frame to the tool tip along its z axis.
  double tool_length = 0.0;

  int dof() const { return static_cast<int>(links.size()); }
};

// UR5e-like 6-DoF chain with a short suction tool.
ChainParams default_chain();
JointLimits default_limits();

// A planar chain of revolute joints about z with the given link lengths.
ChainParams planar_chain(const std::vector<double>& lengths);

template <typename Scalar>
Eigen::Transform<Scalar, 3, Eigen::Isometry> dh_transform(const DhLink& link,
                                                          Scalar theta) {
  using std::cos;
  using std::sin;
  const Scalar t = theta + Scalar(link.theta_offset);
  const Scalar ct = cos(t), st = sin(t);
  const Scalar ca = cos(Scalar(link.alpha)), sa = sin(Scalar(link.alpha));
  Eigen::Transform<Scalar, 3, Eigen::Isometry> T;
  T.matrix() << ct, -st * ca, st * sa, Scalar(link.a) * ct,  //
      st, ct * ca, -ct * sa, Scalar(link.a) * st,            //
      Scalar(0), sa, ca, Scalar(link.d),                     //
      Scalar(0), Scalar(0), Scalar(0), Scalar(1);
  return T;
}

// All joint frames: element 0 is the base, element i the frame after joint i.
// The last element is the tool tip frame.
template <typename Derived>
std::vector<Eigen::Transform<typename Derived::Scalar, 3, Eigen::Isometry>>
chain_frames(const ChainParams& chain, const Eigen::MatrixBase<Derived>& q) {
  using Scalar = typename Derived::Scalar;
  using Transform = Eigen::Transform<Scalar, 3, Eigen::Isometry>;
  if (q.size() != chain.dof()) {
    throw ShapeError("joint vector size " + std::to_string(q.size()) +
                     " does not match chain dof " + std::to_string(chain.dof()));
  }
  std::vector<Transform> frames;
  frames.reserve(chain.links.size() + 2);
  Transform T = chain.base.template cast<Scalar>();
  frames.push_back(T);
  for (int i = 0; i < chain.dof(); ++i) {
    T = T * dh_transform<Scalar>(chain.links[i], q(i));
    frames.push_back(T);
  }
  Transform tool = Transform::Identity();
  tool.translation().z() = Scalar(chain.tool_length);
  frames.push_back(T * tool);
  return frames;
}

// Tool tip pose. Throws DomainError when a joint lies outside `limits`.
template <typename Derived>
Eigen::Transform<typename Derived::Scalar, 3, Eigen::Isometry>
forward_kinematics(const ChainParams& chain, const JointLimits& limits,
                   const Eigen::MatrixBase<Derived>& q) {
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    const double v = static_cast<double>(q(i));
    if (!std::isfinite(v) || i >= limits.lower.size() || v < limits.lower(i) ||
        v > limits.upper(i)) {
      throw DomainError("joint " + std::to_string(i) + " = " +
                        std::to_string(v) + " outside its limits");
    }
  }
  return chain_frames(chain, q).back();
}

// Roll about x and pitch about y from a ZYX decomposition. Roll is returned
// in [0, 2*pi) so that a downward-facing tool sits at pi.
inline double roll_of(const Eigen::Matrix3d& R) {
  double r = std::atan2(R(2, 1), R(2, 2));
  if (r < 0.0) r += 2.0 * M_PI;
  return r;
}
inline double pitch_of(const Eigen::Matrix3d& R) {
  return std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
}
// Roll in (-pi, pi], used for objects whose neutral orientation is upright.
inline double signed_roll_of(const Eigen::Matrix3d& R) {
  return std::atan2(R(2, 1), R(2, 2));
}

}  // namespace h2r::env
