#include "h2r/evalcli/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "h2r/common/errors.hpp"

namespace h2r::evalcli {

using nlohmann::json;

namespace {

// Reads fields of one JSON object, remembering which keys were consumed so
// that leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("expected an object", path_.empty() ? "/" : path_);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    check_type<T>(v, path_ + "/" + key);
    try {
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(e.what(), path_ + "/" + key);
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, path_ + "/" + key);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key", path_ + "/" + k);
  }

 private:
  template <typename T>
  static void check_type(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("expected a boolean", path);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("expected an integer", path);
      if (std::is_unsigned_v<T> && !v.is_number_unsigned())
        throw ConfigError("expected a non-negative integer", path);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("expected a number", path);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("expected a string", path);
    } else {
      if (!v.is_array()) throw ConfigError("expected an array", path);
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json workspace_json(const env::Workspace& w) {
  return {{"x_min", w.x_min}, {"x_max", w.x_max}, {"y_min", w.y_min}, {"y_max", w.y_max}, {"z0", w.z0}};
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.env = env::simplified_3dof_config();
  c.td3.hidden = {64, 64};
  c.td3.batch_size = 128;
  c.td3.gamma = 0.9;
  return c;
}

void RunConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("must not be empty", "/out_dir");
  if (precision != "float32" && precision != "float64")
    throw ConfigError("expected \"float32\" or \"float64\"", "/precision");
  env.validate();
  weights.validate();
  scales.validate();
  td3.validate();
  if (train.episodes < 1) throw ConfigError("must be >= 1", "/train/episodes");
  if (train.eval_every < 0) throw ConfigError("must be >= 0", "/train/eval_every");
  if (train.eval_episodes < 1) throw ConfigError("must be >= 1", "/train/eval_episodes");
  if (!(train.stop_success_rate >= 0.0 && train.stop_success_rate <= 1.0))
    throw ConfigError("must be in [0, 1]", "/train/stop_success_rate");
  if (train.checkpoint_every < 0) throw ConfigError("must be >= 0", "/train/checkpoint_every");
  if (!(train.noise.position >= 0.0)) throw ConfigError("must be >= 0", "/train/noise_position");
  if (!(train.noise.velocity >= 0.0)) throw ConfigError("must be >= 0", "/train/noise_velocity");
  if (eval.episodes < 1) throw ConfigError("must be >= 1", "/eval/episodes");
  if (eval.thresholds_cm.empty()) throw ConfigError("needs at least one threshold", "/eval/thresholds_cm");
  for (double t : eval.thresholds_cm)
    if (!(t > 0.0)) throw ConfigError("thresholds must be > 0", "/eval/thresholds_cm");
  vision.validate();
  if (command.backend != "mock" && command.backend != "remote")
    throw ConfigError("expected \"mock\" or \"remote\"", "/command/backend");
  if (command.attempts < 1) throw ConfigError("must be >= 1", "/command/attempts");
  if (command.timeout_ms < 1) throw ConfigError("must be >= 1", "/command/timeout_ms");
}

json to_json(const RunConfig& c) {
  const auto& e = c.env;
  json active = json::array();
  for (bool a : e.active) active.push_back(a);
  json home = json::array();
  for (int i = 0; i < 6; ++i) home.push_back(e.home(i));
  const auto& w = c.weights;
  const auto& s = c.scales;
  json td3 = td3::to_json(c.td3);
  return {
      {"seed", c.seed},
      {"out_dir", c.out_dir},
      {"precision", c.precision},
      {"env",
       {{"task", env::to_string(e.task)},      {"dt", e.dt},
        {"max_steps", e.max_steps},            {"success_tolerance", e.success_tolerance},
        {"max_joint_speed", e.max_joint_speed}, {"contact_radius", e.contact_radius},
        {"link_radius", e.link_radius},        {"lift_height", e.lift_height},
        {"home_jitter", e.home_jitter},        {"spawn_margin", e.spawn_margin},
        {"min_object_size", e.min_object_size}, {"max_object_size", e.max_object_size},
        {"container_radius", e.container_radius}, {"container_height", e.container_height},
        {"object_count", e.object_count},      {"active", active},
        {"wrist_leveling", e.wrist_leveling},  {"home", home},
        {"workspace", workspace_json(e.workspace)}}},
      {"reward",
       {{"weights",
         {{"w0", w.w0}, {"w1", w.w1}, {"w2", w.w2}, {"w3", w.w3}, {"w4", w.w4}, {"w5", w.w5},
          {"w6", w.w6}, {"w7", w.w7}, {"w0_final", w.w0_final}, {"collision", w.collision},
          {"step_limit", w.step_limit}, {"ee_inclination", w.ee_inclination},
          {"object_inclination", w.object_inclination}, {"workspace", w.workspace}}},
        {"scales",
         {{"lambda0", s.lambda0}, {"lambda1", s.lambda1}, {"lambda2", s.lambda2},
          {"lambda3", s.lambda3}, {"lambda4", s.lambda4}, {"lambda5", s.lambda5},
          {"sigma1", s.sigma1}, {"eps_t", s.eps_t}, {"psi_c", s.psi_c}, {"theta_c", s.theta_c},
          {"divisor", s.divisor}}}}},
      {"td3", td3},
      {"train",
       {{"episodes", c.train.episodes}, {"eval_every", c.train.eval_every},
        {"eval_episodes", c.train.eval_episodes}, {"stop_success_rate", c.train.stop_success_rate},
        {"keep_best", c.train.keep_best},
        {"checkpoint_every", c.train.checkpoint_every},
        {"observation_noise", c.train.observation_noise},
        {"noise_position", c.train.noise.position}, {"noise_velocity", c.train.noise.velocity}}},
      {"eval", {{"episodes", c.eval.episodes}, {"thresholds_cm", c.eval.thresholds_cm}}},
      {"vision", command::to_json(c.vision)},
      {"command",
       {{"backend", c.command.backend}, {"endpoint", c.command.endpoint},
        {"fixture", c.command.fixture}, {"attempts", c.command.attempts},
        {"timeout_ms", c.command.timeout_ms}}}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c = default_run_config();
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("out_dir", c.out_dir);
  root.get("precision", c.precision);

  {
    Section s = root.child("env");
    auto& e = c.env;
    std::string task = env::to_string(e.task);
    s.get("task", task);
    try {
      e.task = env::task_from_string(task);
    } catch (const ConfigError& ex) {
      throw ConfigError(ex.what(), "/env/task");
    }
    s.get("dt", e.dt);
    s.get("max_steps", e.max_steps);
    s.get("success_tolerance", e.success_tolerance);
    s.get("max_joint_speed", e.max_joint_speed);
    s.get("contact_radius", e.contact_radius);
    s.get("link_radius", e.link_radius);
    s.get("lift_height", e.lift_height);
    s.get("home_jitter", e.home_jitter);
    s.get("spawn_margin", e.spawn_margin);
    s.get("min_object_size", e.min_object_size);
    s.get("max_object_size", e.max_object_size);
    s.get("container_radius", e.container_radius);
    s.get("container_height", e.container_height);
    s.get("object_count", e.object_count);
    std::vector<bool> active(e.active.begin(), e.active.end());
    s.get("active", active);
    if (active.size() != 6) throw ConfigError("expected 6 entries", "/env/active");
    std::copy(active.begin(), active.end(), e.active.begin());
    s.get("wrist_leveling", e.wrist_leveling);
    std::vector<double> home(e.home.data(), e.home.data() + 6);
    s.get("home", home);
    if (home.size() != 6) throw ConfigError("expected 6 joint angles", "/env/home");
    e.home = Eigen::Map<const Vec6>(home.data());
    Section ws = s.child("workspace");
    ws.get("x_min", e.workspace.x_min);
    ws.get("x_max", e.workspace.x_max);
    ws.get("y_min", e.workspace.y_min);
    ws.get("y_max", e.workspace.y_max);
    ws.get("z0", e.workspace.z0);
    ws.finish();
    s.finish();
  }
  {
    Section r = root.child("reward");
    Section w = r.child("weights");
    auto& rw = c.weights;
    w.get("w0", rw.w0);
    w.get("w1", rw.w1);
    w.get("w2", rw.w2);
    w.get("w3", rw.w3);
    w.get("w4", rw.w4);
    w.get("w5", rw.w5);
    w.get("w6", rw.w6);
    w.get("w7", rw.w7);
    w.get("w0_final", rw.w0_final);
    w.get("collision", rw.collision);
    w.get("step_limit", rw.step_limit);
    w.get("ee_inclination", rw.ee_inclination);
    w.get("object_inclination", rw.object_inclination);
    w.get("workspace", rw.workspace);
    w.finish();
    Section s = r.child("scales");
    auto& rs = c.scales;
    s.get("lambda0", rs.lambda0);
    s.get("lambda1", rs.lambda1);
    s.get("lambda2", rs.lambda2);
    s.get("lambda3", rs.lambda3);
    s.get("lambda4", rs.lambda4);
    s.get("lambda5", rs.lambda5);
    s.get("sigma1", rs.sigma1);
    s.get("eps_t", rs.eps_t);
    s.get("psi_c", rs.psi_c);
    s.get("theta_c", rs.theta_c);
    s.get("divisor", rs.divisor);
    s.finish();
    r.finish();
  }
  {
    Section s = root.child("td3");
    auto& t = c.td3;
    s.get("gamma", t.gamma);
    s.get("rho", t.rho);
    s.get("buffer_capacity", t.buffer_capacity);
    s.get("batch_size", t.batch_size);
    s.get("policy_delay", t.policy_delay);
    s.get("exploration_sigma", t.exploration_sigma);
    s.get("target_sigma", t.target_sigma);
    s.get("noise_clip", t.noise_clip);
    s.get("actor_lr", t.actor_lr);
    s.get("critic_lr", t.critic_lr);
    std::string opt = t.optimizer == neural::OptimizerKind::Adam ? "adam" : "sgd";
    s.get("optimizer", opt);
    if (opt == "adam") t.optimizer = neural::OptimizerKind::Adam;
    else if (opt == "sgd") t.optimizer = neural::OptimizerKind::Sgd;
    else throw ConfigError("expected \"adam\" or \"sgd\"", "/td3/optimizer");
    s.get("hidden", t.hidden);
    s.get("actor_last_layer_scale", t.actor_last_layer_scale);
    s.get("success_is_terminal", t.success_is_terminal);
    s.get("timeout_is_terminal", t.timeout_is_terminal);
    s.get("warmup", t.warmup);
    s.get("updates_per_step", t.updates_per_step);
    s.finish();
  }
  {
    Section s = root.child("train");
    auto& t = c.train;
    s.get("episodes", t.episodes);
    s.get("eval_every", t.eval_every);
    s.get("eval_episodes", t.eval_episodes);
    s.get("stop_success_rate", t.stop_success_rate);
    s.get("keep_best", t.keep_best);
    s.get("checkpoint_every", t.checkpoint_every);
    s.get("observation_noise", t.observation_noise);
    s.get("noise_position", t.noise.position);
    s.get("noise_velocity", t.noise.velocity);
    s.finish();
  }
  {
    Section s = root.child("eval");
    s.get("episodes", c.eval.episodes);
    s.get("thresholds_cm", c.eval.thresholds_cm);
    s.finish();
  }
  {
    Section s = root.child("vision");
    auto& v = c.vision;
    s.get("keep_ratio", v.keep_ratio);
    s.get("pixel_thresh", v.keyframes.pixel_thresh);
    s.get("frac_thresh", v.keyframes.frac_thresh);
    s.get("iou_threshold", v.tracker.iou_threshold);
    s.get("min_track_samples", v.tracker.min_samples);
    v.classifier.min_samples = v.tracker.min_samples;
    s.get("disp_thresh", v.classifier.disp_thresh);
    s.get("var_thresh", v.classifier.var_thresh);
    s.get("hand_label", v.hand_label);
    s.get("prompt", v.prompt);
    s.finish();
  }
  {
    Section s = root.child("command");
    s.get("backend", c.command.backend);
    s.get("endpoint", c.command.endpoint);
    s.get("fixture", c.command.fixture);
    s.get("attempts", c.command.attempts);
    s.get("timeout_ms", c.command.timeout_ms);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

json apply_env_overrides(json j, const EnvLookup& lookup) {
  if (!j.is_object()) throw ConfigError("expected an object", "/");
  // Top-level scalars known to the schema, present or not.
  const json defaults = to_json(default_run_config());
  for (const auto& [key, def] : defaults.items()) {
    if (def.is_object() || def.is_array()) continue;
    std::string var = "H2R_";
    for (char ch : key) var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const auto v = lookup(var);
    if (!v) continue;
    if (def.is_string()) {
      j[key] = *v;
      continue;
    }
    json parsed = json::parse(*v, nullptr, false);
    if (parsed.is_discarded() || parsed.is_object() || parsed.is_array())
      throw ConfigError("environment variable " + var + " is not a scalar: '" + *v + "'", "/" + key);
    j[key] = parsed;
  }
  return j;
}

RunConfig load_run_config(const std::string& path, const EnvLookup& lookup) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return run_config_from_json(apply_env_overrides(std::move(j), lookup));
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string run_id(const json& snapshot) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(snapshot.dump())));
  return std::string(buf, 12);
}

}  // namespace h2r::evalcli
