#include <json.hpp>

#include "h2r/td3/agent.hpp"
#include "h2r/td3/evaluate.hpp"
#include "h2r/td3/trainer.hpp"

namespace h2r::td3 {

using nlohmann::json;

void Td3Config::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("must lie in (0, 1)", "/td3/gamma");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("must lie in [0, 1]", "/td3/rho");
  if (buffer_capacity < 1) throw ConfigError("must be >= 1", "/td3/buffer_capacity");
  if (batch_size < 1) throw ConfigError("must be >= 1", "/td3/batch_size");
  if (policy_delay < 1) throw ConfigError("must be >= 1", "/td3/policy_delay");
  if (!(exploration_sigma >= 0.0)) throw ConfigError("must be >= 0", "/td3/exploration_sigma");
  if (!(target_sigma >= 0.0)) throw ConfigError("must be >= 0", "/td3/target_sigma");
  if (!(noise_clip > 0.0)) throw ConfigError("must be > 0", "/td3/noise_clip");
  if (!(actor_lr > 0.0)) throw ConfigError("must be > 0", "/td3/actor_lr");
  if (!(critic_lr > 0.0)) throw ConfigError("must be > 0", "/td3/critic_lr");
  if (hidden.empty()) throw ConfigError("needs at least one hidden layer", "/td3/hidden");
  for (int w : hidden)
    if (w < 1) throw ConfigError("widths must be >= 1", "/td3/hidden");
  if (warmup < 0) throw ConfigError("must be >= 0", "/td3/warmup");
  if (updates_per_step < 0) throw ConfigError("must be >= 0", "/td3/updates_per_step");
}

json to_json(const Td3Config& c) {
  return {{"gamma", c.gamma},
          {"rho", c.rho},
          {"buffer_capacity", c.buffer_capacity},
          {"batch_size", c.batch_size},
          {"policy_delay", c.policy_delay},
          {"exploration_sigma", c.exploration_sigma},
          {"target_sigma", c.target_sigma},
          {"noise_clip", c.noise_clip},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"optimizer", c.optimizer == neural::OptimizerKind::Adam ? "adam" : "sgd"},
          {"hidden", c.hidden},
          {"actor_last_layer_scale", c.actor_last_layer_scale},
          {"success_is_terminal", c.success_is_terminal},
          {"timeout_is_terminal", c.timeout_is_terminal},
          {"warmup", c.warmup},
          {"updates_per_step", c.updates_per_step}};
}

Td3Config td3_config_from_json(const json& j) {
  Td3Config c;
  c.gamma = j.value("gamma", c.gamma);
  c.rho = j.value("rho", c.rho);
  c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.policy_delay = j.value("policy_delay", c.policy_delay);
  c.exploration_sigma = j.value("exploration_sigma", c.exploration_sigma);
  c.target_sigma = j.value("target_sigma", c.target_sigma);
  c.noise_clip = j.value("noise_clip", c.noise_clip);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  const std::string opt = j.value("optimizer", std::string("adam"));
  if (opt == "adam") c.optimizer = neural::OptimizerKind::Adam;
  else if (opt == "sgd") c.optimizer = neural::OptimizerKind::Sgd;
  else throw ConfigError("expected \"adam\" or \"sgd\"", "/td3/optimizer");
  c.hidden = j.value("hidden", c.hidden);
  c.actor_last_layer_scale = j.value("actor_last_layer_scale", c.actor_last_layer_scale);
  c.success_is_terminal = j.value("success_is_terminal", c.success_is_terminal);
  c.timeout_is_terminal = j.value("timeout_is_terminal", c.timeout_is_terminal);
  c.warmup = j.value("warmup", c.warmup);
  c.updates_per_step = j.value("updates_per_step", c.updates_per_step);
  c.validate();
  return c;
}

neural::MlpSpec actor_spec(int state_dim, int action_dim, const std::vector<int>& hidden) {
  neural::MlpSpec s;
  s.input = state_dim;
  s.hidden = hidden;
  s.hidden_activation = neural::Activation::Relu;
  s.heads = {{neural::Activation::Tanh, action_dim - 1}, {neural::Activation::Sigmoid, 1}};
  s.validate();
  return s;
}

neural::MlpSpec critic_spec(int state_dim, int action_dim, const std::vector<int>& hidden) {
  neural::MlpSpec s;
  s.input = state_dim + action_dim;
  s.hidden = hidden;
  s.hidden_activation = neural::Activation::Relu;
  s.heads = {{neural::Activation::Identity, 1}};
  s.validate();
  return s;
}

json to_json(const EvalResult& r) {
  return {{"episodes", r.episodes},
          {"tolerance", r.tolerance},
          {"success_rate", r.success_rate},
          {"mean_return", r.mean_return},
          {"mean_undiscounted_return", r.mean_undiscounted_return},
          {"mean_length", r.mean_length},
          {"terminations", r.terminations}};
}

json terms_json(const reward::RewardBreakdown& t);

json to_json(const EpisodeRecord& r) {
  const auto& t = r.term_sums;
  return {{"episode", r.episode},
          {"return", r.ret},
          {"discounted_return", r.discounted_return},
          {"length", r.length},
          {"termination", r.termination},
          {"success", r.success},
          {"total_steps", r.total_steps},
          {"terms", terms_json(t)}};
}

json terms_json(const reward::RewardBreakdown& t) {
  return {{"r_e", t.r_e}, {"r_i", t.r_i}, {"r_a", t.r_a}, {"c_c", t.c_c}, {"c_s", t.c_s},
          {"c_e", t.c_e}, {"c_a", t.c_a}, {"c_o", t.c_o}, {"c_w", t.c_w}, {"total", t.total}};
}

json trace_record(int episode, int step, const StateVec& state, const ActionVec& action,
                  const reward::RewardBreakdown& reward, const env::EventSet& events,
                  const std::optional<env::Termination>& termination) {
  json j = {{"episode", episode},
            {"step", step},
            {"state", std::vector<double>(state.data(), state.data() + state.size())},
            {"action", std::vector<double>(action.data(), action.data() + action.size())},
            {"reward", terms_json(reward)},
            {"events", events.names()}};
  j["termination"] = termination ? json(env::to_string(*termination)) : json(nullptr);
  return j;
}

}  // namespace h2r::td3
