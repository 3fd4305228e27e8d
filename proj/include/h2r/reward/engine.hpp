#pragma once

#include <optional>

#include "h2r/env/types.hpp"
#include "h2r/reward/terms.hpp"

namespace h2r::reward {

struct StepContext {
  const env::Snapshot& prev;
  const env::Snapshot& curr;
  const env::EventSet& events;
  std::optional<env::Termination> termination;
  const ActionVec& action;
  const ActionVec& prev_action;
  const ActionVec& prev_action2;
  double dt = 0.05;
  int max_steps = 100;
  const env::Workspace& workspace;
};

// Evaluates every reward and penalty term for one environment transition and
// applies the success override. Keeps the previous breakdown for r_i carry.
class RewardEngine {
 public:
  RewardEngine() = default;
  RewardEngine(RewardWeights weights, RewardScales scales);

  void reset() { last_ = RewardBreakdown{}; }
  void set_weights(const RewardWeights& w) { weights_ = w; }
  const RewardWeights& weights() const { return weights_; }
  const RewardScales& scales() const { return scales_; }

  RewardBreakdown evaluate(const StepContext& ctx);

 private:
  RewardWeights weights_;
  RewardScales scales_;
  RewardBreakdown last_;
};

}  // namespace h2r::reward
