#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2r/agentio/observation.hpp"
#include "h2r/agentio/replay_buffer.hpp"
#include "h2r/agentio/welford.hpp"
#include "h2r/env/environment.hpp"
#include "h2r/reward/engine.hpp"
#include "h2r/td3/agent.hpp"
#include "h2r/td3/evaluate.hpp"

namespace h2r::td3 {

struct TrainConfig {
  env::EnvConfig env;
  reward::RewardWeights weights;
  reward::RewardScales scales;
  Td3Config td3;
  int episodes = 1000;
  std::uint64_t seed = 0;
  bool observation_noise = true;
  agentio::NoiseWidths noise;
  // Periodic greedy evaluation on a fixed validation seed set.
  int eval_every = 500;
  int eval_episodes = 20;
  // Stop once a periodic evaluation reaches this success rate (<= 0 disables).
  double stop_success_rate = 0.0;
  // Remember the policy with the best validation success (ties keep the
  // earlier one); best_policy() returns it and best.ckpt stores it.
  bool keep_best = true;
  int checkpoint_every = 0;
  std::string out_dir;  // empty: no files written
  // Stored verbatim in checkpoints, e.g. the full user-facing config.
  nlohmann::json metadata = nlohmann::json::object();
};

struct EpisodeRecord {
  int episode = 0;
  double ret = 0.0;
  double discounted_return = 0.0;
  int length = 0;
  std::string termination;
  bool success = false;
  reward::RewardBreakdown term_sums;
  std::int64_t total_steps = 0;
};

nlohmann::json to_json(const EpisodeRecord& r);

struct EvalRecord {
  int episode = 0;
  EvalResult result;
};

struct TrainCallbacks {
  std::function<void(const EpisodeRecord&)> on_episode;
  std::function<void(const EvalRecord&)> on_eval;
};

struct TrainResult {
  std::vector<EpisodeRecord> curve;
  std::vector<EvalRecord> evals;
  int episodes_run = 0;
  std::int64_t total_steps = 0;
  bool stopped_early = false;
  int best_episode = 0;  // 0: no validation ran, best_policy() is the final one
  double best_success_rate = 0.0;
};

// Validation seeds are far from the per-episode training seeds, which are
// drawn from the trainer RNG.
inline constexpr std::uint64_t kValidationSeedBase = 0x5eed0000ull;
// Final evaluation seeds, disjoint from both.
inline constexpr std::uint64_t kTestSeedBase = 0x7e570000ull;

template <typename Scalar>
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg)
      : cfg_(std::move(cfg)),
        env_(cfg_.env),
        engine_(cfg_.weights, cfg_.scales),
        agent_(kStateDim, kActionDim, cfg_.td3, cfg_.seed * 0x9E3779B97F4A7C15ull + 1),
        buffer_(cfg_.td3.buffer_capacity, kStateDim, kActionDim),
        rng_(cfg_.seed) {
    if (cfg_.episodes < 1) throw ConfigError("must be >= 1", "/train/episodes");
    if (cfg_.eval_every < 0) throw ConfigError("must be >= 0", "/train/eval_every");
    if (cfg_.eval_episodes < 1) throw ConfigError("must be >= 1", "/train/eval_episodes");
    if (cfg_.checkpoint_every < 0) throw ConfigError("must be >= 0", "/train/checkpoint_every");
    cfg_.weights.validate();
    cfg_.scales.validate();
  }

  TrainResult run(const TrainCallbacks& callbacks = {}) {
    TrainResult result;
    std::ofstream metrics, curve;
    if (!cfg_.out_dir.empty()) {
      std::filesystem::create_directories(cfg_.out_dir);
      metrics.open(std::filesystem::path(cfg_.out_dir) / "metrics.jsonl");
      curve.open(std::filesystem::path(cfg_.out_dir) / "curves.csv");
      curve << "episode,return,discounted_return,length,success,termination\n";
    }
    for (int ep = episode_ + 1; ep <= cfg_.episodes; ++ep) {
      EpisodeRecord rec;
      try {
        rec = run_episode(ep);
      } catch (const std::exception& e) {
        throw PipelineError("training episode " + std::to_string(ep) + ": " + e.what());
      }
      episode_ = ep;
      result.curve.push_back(rec);
      if (metrics.is_open()) metrics << to_json(rec).dump() << '\n';
      if (curve.is_open())
        curve << rec.episode << ',' << fmt(rec.ret) << ',' << fmt(rec.discounted_return) << ','
              << rec.length << ',' << (rec.success ? 1 : 0) << ',' << rec.termination << '\n';
      if (callbacks.on_episode) callbacks.on_episode(rec);

      bool stop = false;
      if (cfg_.eval_every > 0 && ep % cfg_.eval_every == 0) {
        EvalRecord er{ep, validate_policy()};
        result.evals.push_back(er);
        if (metrics.is_open()) {
          nlohmann::json j = to_json(er.result);
          j["kind"] = "eval";
          j["episode"] = ep;
          metrics << j.dump() << '\n';
        }
        if (callbacks.on_eval) callbacks.on_eval(er);
        stop = cfg_.stop_success_rate > 0.0 && er.result.success_rate >= cfg_.stop_success_rate;
        if (cfg_.keep_best && (!best_agent_ || er.result.success_rate > result.best_success_rate)) {
          best_agent_ = agent_;
          best_normalizer_ = normalizer_;
          result.best_episode = ep;
          result.best_success_rate = er.result.success_rate;
          if (!cfg_.out_dir.empty()) save_checkpoint(checkpoint_dir() / "best.ckpt");
        }
      }
      if (!cfg_.out_dir.empty() && cfg_.checkpoint_every > 0 && ep % cfg_.checkpoint_every == 0)
        save_checkpoint(checkpoint_dir() / ("checkpoint_" + std::to_string(ep) + ".ckpt"));
      if (stop) {
        result.stopped_early = true;
        break;
      }
    }
    if (metrics.is_open()) metrics.flush();
    if (!cfg_.out_dir.empty()) save_checkpoint(checkpoint_dir() / "final.ckpt");
    result.episodes_run = episode_;
    result.total_steps = total_steps_;
    return result;
  }

  EvalResult validate_policy() const {
    return evaluate(policy(), eval_setup(kValidationSeedBase), cfg_.eval_episodes, cfg_.env.success_tolerance);
  }

  EvalSetup eval_setup(std::uint64_t seed) const {
    return {cfg_.env, cfg_.weights, cfg_.scales, cfg_.td3.gamma, seed, {}};
  }

  AgentPolicy<Scalar> policy() const { return {agent_, normalizer_}; }

  AgentPolicy<Scalar> best_policy() const {
    if (best_agent_) return {*best_agent_, *best_normalizer_};
    return policy();
  }

  nlohmann::json checkpoint() const {
    std::ostringstream rng_state;
    rng_state << rng_;
    return {{"format", "h2r-checkpoint"},
            {"version", 1},
            {"scalar", sizeof(Scalar) == 4 ? "float32" : "float64"},
            {"episode", episode_},
            {"total_steps", total_steps_},
            {"rng", rng_state.str()},
            {"normalizer", normalizer_.to_json()},
            {"agent", agent_.to_json()},
            {"metadata", cfg_.metadata}};
  }

  std::filesystem::path checkpoint_dir() const { return std::filesystem::path(cfg_.out_dir) / "checkpoints"; }

  void save_checkpoint(const std::filesystem::path& path) const {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw PipelineError("cannot write checkpoint " + path.string());
    f << checkpoint().dump() << '\n';
  }

  const Td3Agent<Scalar>& agent() const { return agent_; }
  Td3Agent<Scalar>& agent() { return agent_; }
  const agentio::StateNormalizer& normalizer() const { return normalizer_; }
  const agentio::ReplayBuffer<Scalar>& buffer() const { return buffer_; }
  const TrainConfig& config() const { return cfg_; }
  int episode() const { return episode_; }

 private:
  static std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  }

  VectorX<Scalar> observe(const env::Snapshot& snap, const ActionVec& prev) {
    agentio::RawObservation raw = agentio::assemble_state(snap, prev);
    if (cfg_.observation_noise) raw = agentio::inject_noise(raw, rng_, cfg_.noise);
    normalizer_.update(raw.values);
    return normalizer_.normalize(raw.values).template cast<Scalar>();
  }

  ActionVec random_action() {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ActionVec a;
    for (int i = 0; i < 6; ++i) a(i) = u(rng_);
    a(6) = 0.5 * (u(rng_) + 1.0);
    return a;
  }

  EpisodeRecord run_episode(int ep) {
    const double progress = cfg_.episodes > 1 ? static_cast<double>(ep - 1) / (cfg_.episodes - 1) : 1.0;
    engine_.set_weights(reward::anneal_weights(progress, cfg_.weights));
    engine_.reset();
    env::Snapshot snap = env_.reset(rng_(), cfg_.env.task);
    ActionVec prev = ActionVec::Zero(), prev2 = ActionVec::Zero();
    VectorX<Scalar> s = observe(snap, prev);

    EpisodeRecord rec;
    rec.episode = ep;
    double g = 1.0;
    const std::size_t batch = static_cast<std::size_t>(cfg_.td3.batch_size);
    for (;;) {
      ActionVec a;
      if (total_steps_ < cfg_.td3.warmup) {
        a = random_action();
      } else {
        a = agent_.select_action(s, true, rng_).template cast<double>();
      }
      const auto out = env_.step(to_command(a, cfg_.env.max_joint_speed));
      const reward::StepContext ctx{snap, out.snapshot, out.events, out.termination, a, prev, prev2,
                                    cfg_.env.dt, cfg_.env.max_steps, cfg_.env.workspace};
      const reward::RewardBreakdown rb = engine_.evaluate(ctx);
      const VectorX<Scalar> s_next = observe(out.snapshot, a);
      const bool done = out.termination.has_value();
      buffer_.push({s, a.cast<Scalar>(), Scalar(rb.total), s_next, cuts_bootstrap(out.termination)});
      ++total_steps_;
      if (total_steps_ >= cfg_.td3.warmup && buffer_.size() >= batch) {
        for (int u = 0; u < cfg_.td3.updates_per_step; ++u) agent_.update(buffer_.sample(batch, rng_), rng_);
      }

      accumulate(rec.term_sums, rb);
      rec.ret += rb.total;
      rec.discounted_return += g * rb.total;
      g *= cfg_.td3.gamma;
      ++rec.length;
      prev2 = prev;
      prev = a;
      s = s_next;
      snap = out.snapshot;
      if (done) {
        rec.termination = env::to_string(*out.termination);
        rec.success = *out.termination == env::Termination::Success;
        break;
      }
    }
    rec.total_steps = total_steps_;
    return rec;
  }

  bool cuts_bootstrap(const std::optional<env::Termination>& t) const {
    if (!t) return false;
    if (*t == env::Termination::Success) return cfg_.td3.success_is_terminal;
    if (*t == env::Termination::Timeout) return cfg_.td3.timeout_is_terminal;
    return true;
  }

  static void accumulate(reward::RewardBreakdown& sum, const reward::RewardBreakdown& b) {
    sum.r_e += b.r_e;
    sum.r_i += b.r_i;
    sum.r_a += b.r_a;
    sum.c_c += b.c_c;
    sum.c_s += b.c_s;
    sum.c_e += b.c_e;
    sum.c_a += b.c_a;
    sum.c_o += b.c_o;
    sum.c_w += b.c_w;
    sum.total += b.total;
  }

  TrainConfig cfg_;
  env::Environment env_;
  reward::RewardEngine engine_;
  Td3Agent<Scalar> agent_;
  agentio::ReplayBuffer<Scalar> buffer_;
  agentio::StateNormalizer normalizer_;
  std::mt19937_64 rng_;
  int episode_ = 0;
  std::int64_t total_steps_ = 0;
  std::optional<Td3Agent<Scalar>> best_agent_;
  std::optional<agentio::StateNormalizer> best_normalizer_;
};

// Loaded checkpoint: agent, frozen normalizer and metadata.
template <typename Scalar>
struct LoadedPolicy {
  Td3Agent<Scalar> agent;
  agentio::StateNormalizer normalizer;
  int episode = 0;
  nlohmann::json metadata;

  AgentPolicy<Scalar> policy() const { return {agent, normalizer}; }
};

template <typename Scalar>
LoadedPolicy<Scalar> load_checkpoint(const nlohmann::json& j) {
  if (j.value("format", "") != "h2r-checkpoint") throw ConfigError("not a checkpoint file", "/format");
  if (j.at("version").get<int>() != 1) throw ConfigError("unsupported checkpoint version", "/version");
  return {Td3Agent<Scalar>::from_json(j.at("agent")), agentio::StateNormalizer::from_json(j.at("normalizer")),
          j.at("episode").get<int>(), j.value("metadata", nlohmann::json::object())};
}

}  // namespace h2r::td3
