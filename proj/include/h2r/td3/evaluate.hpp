#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2r/agentio/observation.hpp"
#include "h2r/agentio/welford.hpp"
#include "h2r/env/environment.hpp"
#include "h2r/reward/engine.hpp"
#include "h2r/td3/agent.hpp"

namespace h2r::td3 {

// Maps a policy-space action ([-1, 1]^6 x [0, 1]) to an environment command.
inline env::ActionCommand to_command(const ActionVec& a, double max_joint_speed) {
  env::ActionCommand c;
  c.joint_velocities = a.head<6>() * max_joint_speed;
  c.suction = a(6) > 0.5 ? 1.0 : 0.0;
  return c;
}

struct EvalResult {
  int episodes = 0;
  double tolerance = 0.0;
  double success_rate = 0.0;
  double mean_return = 0.0;             // discounted
  double mean_undiscounted_return = 0.0;
  double mean_length = 0.0;
  std::map<std::string, int> terminations;
  std::vector<bool> successes;
};

nlohmann::json to_json(const EvalResult& r);

struct EvalSetup {
  env::EnvConfig env;
  reward::RewardWeights weights;
  reward::RewardScales scales;
  double gamma = 0.99;
  std::uint64_t seed = 0;  // episode i resets with seed + i
  // Receives one trace record per step when set.
  std::function<void(const nlohmann::json&)> trace;
};

nlohmann::json terms_json(const reward::RewardBreakdown& b);

// One JSONL trace line: clean state vector, action, reward terms, events.
nlohmann::json trace_record(int episode, int step, const StateVec& state, const ActionVec& action,
                            const reward::RewardBreakdown& reward, const env::EventSet& events,
                            const std::optional<env::Termination>& termination);

// Greedy rollouts of `policy`, called as policy(snapshot, prev_action) and
// returning a policy-space action. Success is the env's Success termination
// at tolerance `tolerance`.
template <typename Policy>
EvalResult evaluate(Policy&& policy, const EvalSetup& setup, int n_episodes, double tolerance) {
  if (n_episodes < 1) throw ConfigError("evaluation needs at least one episode", "/eval/episodes");
  env::EnvConfig ec = setup.env;
  ec.success_tolerance = tolerance;
  env::Environment environment(ec);
  reward::RewardEngine engine(setup.weights, setup.scales);
  EvalResult res;
  res.episodes = n_episodes;
  res.tolerance = tolerance;
  int succeeded = 0;
  for (int e = 0; e < n_episodes; ++e) {
    env::Snapshot snap = environment.reset(setup.seed + static_cast<std::uint64_t>(e), ec.task);
    engine.reset();
    ActionVec prev = ActionVec::Zero(), prev2 = ActionVec::Zero();
    double ret = 0.0, disc = 0.0, g = 1.0;
    int len = 0;
    std::string reason = "none";
    bool success = false;
    for (;;) {
      const ActionVec a = policy(static_cast<const env::Snapshot&>(snap), static_cast<const ActionVec&>(prev));
      const auto out = environment.step(to_command(a, ec.max_joint_speed));
      const reward::StepContext ctx{snap, out.snapshot, out.events, out.termination, a, prev, prev2,
                                    ec.dt, ec.max_steps, ec.workspace};
      const reward::RewardBreakdown rb = engine.evaluate(ctx);
      const double r = rb.total;
      if (setup.trace)
        setup.trace(trace_record(e, len, agentio::assemble_state(snap, prev).values, a, rb, out.events,
                                 out.termination));
      ret += r;
      disc += g * r;
      g *= setup.gamma;
      ++len;
      prev2 = prev;
      prev = a;
      snap = out.snapshot;
      if (out.termination) {
        reason = env::to_string(*out.termination);
        success = *out.termination == env::Termination::Success;
        break;
      }
    }
    res.successes.push_back(success);
    succeeded += success ? 1 : 0;
    res.terminations[reason] += 1;
    res.mean_return += disc / n_episodes;
    res.mean_undiscounted_return += ret / n_episodes;
    res.mean_length += static_cast<double>(len) / n_episodes;
  }
  res.success_rate = static_cast<double>(succeeded) / n_episodes;
  return res;
}

// Success at each positional threshold, same episode seeds for every column.
template <typename Policy>
std::vector<EvalResult> threshold_sweep(Policy&& policy, const EvalSetup& setup, int n_episodes,
                                        const std::vector<double>& tolerances) {
  std::vector<EvalResult> out;
  for (double t : tolerances) out.push_back(evaluate(policy, setup, n_episodes, t));
  return out;
}

// Greedy agent policy over frozen normalization statistics, clean observations.
template <typename Scalar>
struct AgentPolicy {
  const Td3Agent<Scalar>& agent;
  const agentio::StateNormalizer& normalizer;

  ActionVec operator()(const env::Snapshot& s, const ActionVec& prev) const {
    const auto raw = agentio::assemble_state(s, prev);
    const VectorX<Scalar> state = normalizer.normalize(raw.values).template cast<Scalar>();
    return agent.act(state).template cast<double>();
  }
};

}  // namespace h2r::td3
