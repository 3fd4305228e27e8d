#pragma once

#include <algorithm>
#include <cmath>

#include "h2r/common/errors.hpp"
#include "h2r/common/types.hpp"
#include "h2r/env/types.hpp"

namespace h2r::reward {

// Term weights. w0 is annealed from w0 to w0_final over training.
struct RewardWeights {
  double w0 = 1.3;
  double w1 = 0.2;
  double w2 = 0.15;
  double w3 = 2.0;
  double w4 = 3.0;
  double w5 = 0.8;
  double w6 = 0.5;
  double w7 = 0.05;
  double w0_final = 0.325;
  // Penalty multipliers applied to c_c, c_s, c_e, c_o, c_w (c_a carries w7).
  double collision = 1.0;
  double step_limit = 1.0;
  double ee_inclination = 1.0;
  double object_inclination = 1.0;
  double workspace = 1.0;

  void validate() const;
};

struct RewardScales {
  double lambda0 = 0.15;
  double lambda1 = 0.5;
  double lambda2 = 0.05;
  double lambda3 = 0.5;
  double lambda4 = 0.05;
  double lambda5 = 0.02;
  double sigma1 = 0.1;
  double eps_t = 0.35;
  double psi_c = 0.0;
  double theta_c = 0.0;
  double divisor = 10.0;

  void validate() const;
};

enum class CollisionKind { None, GroundOrSelf, Object };

struct RewardBreakdown {
  double r_e = 0.0;
  double r_i = 0.0;
  double r_a = 0.0;
  double c_c = 0.0;
  double c_s = 0.0;
  double c_e = 0.0;
  double c_a = 0.0;
  double c_o = 0.0;
  double c_w = 0.0;
  double total = 0.0;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

// r_e: distance, orientation and height shaping towards the object.
template <typename Scalar>
Scalar approach_reward(const Vector3<Scalar>& p_e, const Vector3<Scalar>& p_o,
                       Scalar psi_e, Scalar theta_e, const RewardWeights& w,
                       const RewardScales& s) {
  using std::abs;
  using std::exp;
  const Scalar pi = Scalar(M_PI);
  return Scalar(w.w0) * exp(-(p_e - p_o).norm() / Scalar(s.lambda0)) +
         Scalar(w.w1) * exp(-(abs(psi_e - pi) + abs(theta_e)) / Scalar(s.lambda1)) +
         Scalar(w.w2) * exp(-abs(p_e.z() - p_o.z()) / Scalar(s.lambda2));
}

// r_i: gated on suction contact with the target.
template <typename Scalar>
Scalar interaction_reward(const Vector3<Scalar>& p_o, const Vector3<Scalar>& p_g,
                          bool contact, const RewardWeights& w,
                          const RewardScales& s) {
  using std::exp;
  if (!contact) return Scalar(0);
  const Scalar d = (p_o - p_g).norm();
  return Scalar(w.w3) * exp(-d / Scalar(s.lambda3)) +
         Scalar(w.w4) * exp(-d / Scalar(s.lambda4));
}

template <typename Scalar>
Scalar alignment_ceiling(const RewardWeights& w) {
  return Scalar(3.0 * w.w5);
}

// r_a: object velocity projected on the unit object-to-goal direction.
template <typename Scalar>
Scalar alignment_reward(const Vector3<Scalar>& v_o, const Vector3<Scalar>& u_og,
                        const RewardWeights& w, const RewardScales& s) {
  using std::abs;
  using std::exp;
  if (abs(u_og.norm() - Scalar(1)) > Scalar(1e-6))
    throw DomainError("alignment direction must be a unit vector");
  const Scalar proj = v_o.dot(u_og);
  if (!(proj > Scalar(0))) return Scalar(0);
  const Scalar r = Scalar(w.w5) * exp(proj / Scalar(s.lambda5) - Scalar(1));
  return std::min(r, alignment_ceiling<Scalar>(w));
}

inline double collision_penalty(CollisionKind kind) {
  switch (kind) {
    case CollisionKind::GroundOrSelf:
      return 3.0;
    case CollisionKind::Object:
      return 1.5;
    case CollisionKind::None:
      return 0.0;
  }
  return 0.0;
}

// Ground/self dominates when both kinds occur in one step.
inline CollisionKind collision_kind(const env::EventSet& events) {
  if (events.contains(env::Event::CollisionGroundOrSelf)) return CollisionKind::GroundOrSelf;
  if (events.contains(env::Event::CollisionObject)) return CollisionKind::Object;
  return CollisionKind::None;
}

inline double step_limit_penalty(int step, int max_steps) {
  return step >= max_steps ? 2.0 : 0.0;
}

template <typename Scalar>
Scalar ee_inclination_penalty(Scalar psi_e, Scalar theta_e, double w6) {
  using std::abs;
  return std::max(Scalar(0), Scalar(w6) * (abs(psi_e - Scalar(M_PI)) - abs(theta_e)));
}

template <typename DerivedA, typename DerivedB, typename DerivedC>
typename DerivedA::Scalar action_smoothness_penalty(const Eigen::MatrixBase<DerivedA>& a_t,
                                                    const Eigen::MatrixBase<DerivedB>& a_prev,
                                                    const Eigen::MatrixBase<DerivedC>& a_prev2,
                                                    double w7) {
  using Scalar = typename DerivedA::Scalar;
  return Scalar(w7) * (a_t - Scalar(2) * a_prev + a_prev2).norm();
}

template <typename Scalar>
Scalar object_inclination_penalty(Scalar psi_o, Scalar theta_o, const RewardScales& s) {
  using std::abs;
  const Scalar eps = Scalar(s.eps_t);
  if (!(abs(psi_o) > eps || abs(theta_o) > eps)) return Scalar(0);
  return std::max(Scalar(0), abs(psi_o - Scalar(s.psi_c)) - abs(theta_o - Scalar(s.theta_c)));
}

// Positions on the boundary count as inside. Each point is measured against
// the nearest point of the workspace, so a point inside contributes zero.
inline double workspace_penalty(const Vec3& p_o, const Vec3& p_e,
                                const env::Workspace& ws, double sigma1) {
  if (ws.contains_xy(p_o) && ws.contains_xy(p_e)) return 0.0;
  const auto dist = [&](const Vec3& p) {
    if (ws.contains_xy(p)) return 0.0;
    Vec3 q = ws.nearest_boundary_point(p);
    q.z() = p.z();
    return (p - q).norm();
  };
  return (dist(p_o) + dist(p_e)) / sigma1;
}

// Sum of rewards minus sum of penalties, divided by the normalization
// divisor. Term-level weights are already folded into each field.
inline double total_reward(const RewardBreakdown& b, const RewardScales& s = {}) {
  const double rewards = b.r_e + b.r_i + b.r_a;
  const double penalties = b.c_c + b.c_s + b.c_e + b.c_a + b.c_o + b.c_w;
  return (rewards - penalties) / s.divisor;
}

// Rewards on the success step: hold r_i, drop r_e, triple-max r_a. `current`
// carries this step's penalties, which are kept as computed.
inline RewardBreakdown success_override(const RewardBreakdown& prev,
                                        const RewardBreakdown& current,
                                        const RewardWeights& w,
                                        const RewardScales& s = {}) {
  RewardBreakdown b = current;
  b.r_i = prev.r_i;
  b.r_e = 0.0;
  b.r_a = alignment_ceiling<double>(w);
  b.total = total_reward(b, s);
  return b;
}

// Linear w0 schedule over training progress in [0, 1].
inline RewardWeights anneal_weights(double progress, const RewardWeights& base = {}) {
  const double p = std::clamp(progress, 0.0, 1.0);
  RewardWeights w = base;
  w.w0 = base.w0 + (base.w0_final - base.w0) * p;
  return w;
}

}  // namespace h2r::reward
