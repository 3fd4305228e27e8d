#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2r/agentio/observation.hpp"
#include "h2r/command/pipeline.hpp"
#include "h2r/env/types.hpp"
#include "h2r/reward/terms.hpp"
#include "h2r/td3/agent.hpp"

namespace h2r::evalcli {

struct TrainSection {
  int episodes = 10000;
  int eval_every = 500;
  int eval_episodes = 100;
  double stop_success_rate = 0.0;
  bool keep_best = true;
  int checkpoint_every = 0;
  bool observation_noise = true;
  agentio::NoiseWidths noise;
};

struct EvalSection {
  int episodes = 100;
  std::vector<double> thresholds_cm{1.0, 2.0, 3.0, 4.0};
};

struct CommandSection {
  std::string backend = "mock";  // "mock" or "remote"
  std::string endpoint;
  std::string fixture;           // mock fixture path
  int attempts = 3;
  int timeout_ms = 10000;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "runs";
  std::string precision = "float32";  // or "float64"
  env::EnvConfig env;
  reward::RewardWeights weights;
  reward::RewardScales scales;
  td3::Td3Config td3;
  TrainSection train;
  EvalSection eval;
  command::PipelineConfig vision;
  CommandSection command;

  // Throws ConfigError with the JSON path of the first bad field.
  void validate() const;
};

// Desk-scale defaults: simplified 3-DoF arm, one object.
RunConfig default_run_config();

nlohmann::json to_json(const RunConfig& c);
// Starts from default_run_config(); every key must be known. Errors carry
// the path of the offending field, e.g. "/td3/gamma".
RunConfig run_config_from_json(const nlohmann::json& j);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_environment();

// H2R_<KEY> replaces top-level scalar <key> ("H2R_SEED=3" sets "seed").
// Values are parsed as JSON first and fall back to plain strings.
nlohmann::json apply_env_overrides(nlohmann::json j, const EnvLookup& lookup);

RunConfig load_run_config(const std::string& path, const EnvLookup& lookup = process_environment());

// 12 hex digits of a 64-bit FNV-1a hash over the canonical JSON dump.
std::string run_id(const nlohmann::json& snapshot);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace h2r::evalcli
