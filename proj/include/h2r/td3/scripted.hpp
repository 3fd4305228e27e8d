#pragma once

#include "h2r/env/environment.hpp"

namespace h2r::td3 {

// Hand-written controller used as an upper-bound harness and for smoke runs.
// Resolved-rate motion on the active joints through a damped pseudo-inverse of
// a finite-difference position Jacobian.
class ScriptedPolicy {
 public:
  explicit ScriptedPolicy(env::EnvConfig config, double gain = 4.0)
      : config_(std::move(config)), gain_(gain) {}

  ActionVec operator()(const env::Snapshot& s, const ActionVec& prev) const;

  // Joint velocities (rad/s) that move the tool tip towards `target`.
  Vec6 track(const Vec6& q, const Vec3& target) const;

 private:
  env::EnvConfig config_;
  double gain_;
};

}  // namespace h2r::td3
