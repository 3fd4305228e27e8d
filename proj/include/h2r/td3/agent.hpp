#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "h2r/agentio/replay_buffer.hpp"
#include "h2r/neural/mlp.hpp"
#include "h2r/neural/optimizer.hpp"

namespace h2r::td3 {

struct Td3Config {
  double gamma = 0.99;
  double rho = 0.005;
  std::size_t buffer_capacity = 1'000'000;
  int batch_size = 256;
  int policy_delay = 2;
  double exploration_sigma = 0.2;
  double target_sigma = 0.2;
  double noise_clip = 0.5;
  double actor_lr = 4e-4;
  double critic_lr = 4e-4;
  neural::OptimizerKind optimizer = neural::OptimizerKind::Adam;
  std::vector<int> hidden{256, 256};
  double actor_last_layer_scale = 0.01;
  // Which episode endings cut the bootstrap (stored as done). Collision,
  // joint-limit and workspace endings always do.
  bool success_is_terminal = false;
  bool timeout_is_terminal = false;
  int warmup = 1000;
  int updates_per_step = 1;

  void validate() const;
};

nlohmann::json to_json(const Td3Config& c);
Td3Config td3_config_from_json(const nlohmann::json& j);

// Actor outputs: six tanh joint-velocity components in [-1, 1] (scaled by the
// joint speed limit at the environment boundary) and one logistic suction
// component in [0, 1].
neural::MlpSpec actor_spec(int state_dim, int action_dim, const std::vector<int>& hidden);
neural::MlpSpec critic_spec(int state_dim, int action_dim, const std::vector<int>& hidden);

template <typename Derived>
void clip_to_action_bounds(const Eigen::MatrixBase<Derived>& a_) {
  using Scalar = typename Derived::Scalar;
  auto& a = const_cast<Eigen::MatrixBase<Derived>&>(a_);
  const Eigen::Index joints = a.rows() - 1;
  a.topRows(joints) = a.topRows(joints).cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
  a.bottomRows(1) = a.bottomRows(1).cwiseMax(Scalar(0)).cwiseMin(Scalar(1));
}

// Q value and dQ/da for a batch of (state, action) columns. Used for the actor
// step so that analytic toy critics can stand in for the learned one.
template <typename Scalar>
struct CriticEval {
  VectorX<Scalar> q;
  MatrixX<Scalar> dq_da;
};

struct UpdateStats {
  double critic_loss1 = 0.0;
  double critic_loss2 = 0.0;
  double actor_loss = 0.0;
  bool actor_updated = false;
};

template <typename Scalar>
struct TargetAudit {
  VectorX<Scalar> y;
  VectorX<Scalar> q1;  // target critics at the smoothed next action
  VectorX<Scalar> q2;
  MatrixX<Scalar> next_actions;
};

// One deterministic-policy-gradient step on `actor`: minimizes -mean Q(s, pi(s)).
// Returns the loss before the step.
template <typename Scalar, typename CriticFn>
double actor_gradient_step(neural::Mlp<Scalar>& actor, neural::AdamState<Scalar>& opt,
                           const neural::AdamConfig& cfg, const MatrixX<Scalar>& states,
                           CriticFn&& critic) {
  neural::ForwardCache<Scalar> cache;
  const MatrixX<Scalar> actions = actor(states, &cache);
  const CriticEval<Scalar> ce = critic(states, actions);
  const Scalar n = Scalar(states.cols());
  const double loss = -static_cast<double>(ce.q.sum() / n);
  if (!std::isfinite(loss)) throw DomainError("non-finite actor loss");
  const MatrixX<Scalar> upstream = -ce.dq_da / n;
  const auto g = neural::backward(actor.spec, actor.params, cache, upstream);
  neural::adam_step(actor.params, g.params, opt, cfg);
  return loss;
}

template <typename Scalar>
class Td3Agent {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  Td3Agent(int state_dim, int action_dim, Td3Config cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)), state_dim_(state_dim), action_dim_(action_dim) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    actor_.spec = actor_spec(state_dim, action_dim, cfg_.hidden);
    critic1_.spec = critic_spec(state_dim, action_dim, cfg_.hidden);
    critic2_.spec = critic1_.spec;
    actor_.params = neural::init_params<Scalar>(actor_.spec, rng, cfg_.actor_last_layer_scale);
    critic1_.params = neural::init_params<Scalar>(critic1_.spec, rng);
    critic2_.params = neural::init_params<Scalar>(critic2_.spec, rng);
    actor_t_ = actor_;
    critic1_t_ = critic1_;
    critic2_t_ = critic2_;
    actor_opt_ = neural::AdamState<Scalar>::for_params(actor_.params);
    critic1_opt_ = neural::AdamState<Scalar>::for_params(critic1_.params);
    critic2_opt_ = neural::AdamState<Scalar>::for_params(critic2_.params);
  }

  const Td3Config& config() const { return cfg_; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }

  // Deterministic policy output for one normalized state.
  Vector act(const Vector& state) const { return actor_(state); }

  // Policy output plus N(0, sigma) exploration noise, clipped to the bounds.
  // A negative sigma uses the configured exploration sigma.
  Vector select_action(const Vector& state, bool explore, std::mt19937_64& rng,
                       double sigma = -1.0) const {
    Vector a = act(state);
    if (!explore) return a;
    const double s = sigma < 0.0 ? cfg_.exploration_sigma : sigma;
    if (s > 0.0) {
      std::normal_distribution<double> n(0.0, s);
      for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += Scalar(n(rng));
      clip_to_action_bounds(a);
    }
    return a;
  }

  // Clipped double-Q targets with target-policy smoothing.
  TargetAudit<Scalar> compute_target(const agentio::Batch<Scalar>& b, std::mt19937_64& rng) const {
    TargetAudit<Scalar> out;
    Matrix a = actor_t_(b.next_states);
    std::normal_distribution<double> n(0.0, cfg_.target_sigma);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double eps = std::clamp(n(rng), -cfg_.noise_clip, cfg_.noise_clip);
      a.data()[i] += Scalar(eps);
    }
    clip_to_action_bounds(a);
    const Matrix sa = stack(b.next_states, a);
    out.q1 = critic1_t_(sa).row(0).transpose();
    out.q2 = critic2_t_(sa).row(0).transpose();
    const Vector not_done = (Scalar(1) - b.dones.array()).matrix();
    out.y = b.rewards + (Scalar(cfg_.gamma) * not_done.array() * out.q1.cwiseMin(out.q2).array()).matrix();
    out.next_actions = std::move(a);
    return out;
  }

  // One optimizer step on each critic towards the fixed targets `y`.
  std::pair<double, double> critic_update(const agentio::Batch<Scalar>& b, const Vector& y) {
    const Matrix sa = stack(b.states, b.actions);
    const double l1 = critic_step(critic1_, critic1_opt_, sa, y);
    const double l2 = critic_step(critic2_, critic2_opt_, sa, y);
    ++critic_updates_;
    return {l1, l2};
  }

  // Actor step against critic 1, then soft updates of all three targets.
  double actor_update(const agentio::Batch<Scalar>& b) {
    if (critic_updates_ == 0 || critic_updates_ % cfg_.policy_delay != 0)
      throw StateError("actor update requested off the policy-delay schedule (critic updates = " +
                       std::to_string(critic_updates_) + ", d = " + std::to_string(cfg_.policy_delay) + ")");
    const auto critic = [this](const Matrix& s, const Matrix& a) { return evaluate_critic(critic1_, s, a); };
    const double loss = actor_gradient_step(actor_, actor_opt_, actor_opt_cfg(), b.states, critic);
    ++actor_updates_;
    update_targets();
    return loss;
  }

  UpdateStats update(const agentio::Batch<Scalar>& b, std::mt19937_64& rng) {
    UpdateStats st;
    const auto target = compute_target(b, rng);
    std::tie(st.critic_loss1, st.critic_loss2) = critic_update(b, target.y);
    if (critic_updates_ % cfg_.policy_delay == 0) {
      st.actor_loss = actor_update(b);
      st.actor_updated = true;
    }
    return st;
  }

  void update_targets() {
    neural::soft_update(actor_t_.params, actor_.params, cfg_.rho);
    neural::soft_update(critic1_t_.params, critic1_.params, cfg_.rho);
    neural::soft_update(critic2_t_.params, critic2_.params, cfg_.rho);
  }

  CriticEval<Scalar> evaluate_critic(const neural::Mlp<Scalar>& critic, const Matrix& s,
                                     const Matrix& a) const {
    neural::ForwardCache<Scalar> cache;
    CriticEval<Scalar> ce;
    ce.q = critic(stack(s, a), &cache).row(0).transpose();
    const Matrix ones = Matrix::Ones(1, s.cols());
    const auto g = neural::backward(critic.spec, critic.params, cache, ones);
    ce.dq_da = g.input.bottomRows(action_dim_);
    return ce;
  }

  std::int64_t critic_updates() const { return critic_updates_; }
  std::int64_t actor_updates() const { return actor_updates_; }

  neural::Mlp<Scalar>& actor() { return actor_; }
  neural::Mlp<Scalar>& critic1() { return critic1_; }
  neural::Mlp<Scalar>& critic2() { return critic2_; }
  neural::Mlp<Scalar>& actor_target() { return actor_t_; }
  neural::Mlp<Scalar>& critic1_target() { return critic1_t_; }
  neural::Mlp<Scalar>& critic2_target() { return critic2_t_; }
  const neural::Mlp<Scalar>& actor() const { return actor_; }
  const neural::Mlp<Scalar>& critic1() const { return critic1_; }
  const neural::Mlp<Scalar>& critic2() const { return critic2_; }

  nlohmann::json to_json() const {
    using neural::adam_to_json;
    using neural::params_to_json;
    return {{"config", td3::to_json(cfg_)},
            {"state_dim", state_dim_},
            {"action_dim", action_dim_},
            {"actor_spec", neural::spec_to_json(actor_.spec)},
            {"critic_spec", neural::spec_to_json(critic1_.spec)},
            {"actor", params_to_json(actor_.params)},
            {"critic1", params_to_json(critic1_.params)},
            {"critic2", params_to_json(critic2_.params)},
            {"actor_target", params_to_json(actor_t_.params)},
            {"critic1_target", params_to_json(critic1_t_.params)},
            {"critic2_target", params_to_json(critic2_t_.params)},
            {"actor_opt", adam_to_json(actor_opt_)},
            {"critic1_opt", adam_to_json(critic1_opt_)},
            {"critic2_opt", adam_to_json(critic2_opt_)},
            {"critic_updates", critic_updates_},
            {"actor_updates", actor_updates_}};
  }

  static Td3Agent from_json(const nlohmann::json& j) {
    Td3Agent a(j.at("state_dim").get<int>(), j.at("action_dim").get<int>(),
               td3_config_from_json(j.at("config")), 0);
    const auto load = [&](neural::Mlp<Scalar>& net, const char* key) {
      auto p = neural::params_from_json<Scalar>(j.at(key));
      if (!p.same_shape(net.params)) throw ShapeError(std::string("checkpoint tensor shape mismatch in ") + key);
      net.params = std::move(p);
    };
    if (neural::spec_from_json(j.at("actor_spec")) != a.actor_.spec ||
        neural::spec_from_json(j.at("critic_spec")) != a.critic1_.spec)
      throw ShapeError("checkpoint network spec does not match its config");
    load(a.actor_, "actor");
    load(a.critic1_, "critic1");
    load(a.critic2_, "critic2");
    load(a.actor_t_, "actor_target");
    load(a.critic1_t_, "critic1_target");
    load(a.critic2_t_, "critic2_target");
    a.actor_opt_ = neural::adam_from_json<Scalar>(j.at("actor_opt"));
    a.critic1_opt_ = neural::adam_from_json<Scalar>(j.at("critic1_opt"));
    a.critic2_opt_ = neural::adam_from_json<Scalar>(j.at("critic2_opt"));
    a.critic_updates_ = j.at("critic_updates").get<std::int64_t>();
    a.actor_updates_ = j.at("actor_updates").get<std::int64_t>();
    return a;
  }

 private:
  static Matrix stack(const Matrix& s, const Matrix& a) {
    Matrix sa(s.rows() + a.rows(), s.cols());
    sa << s, a;
    return sa;
  }

  neural::AdamConfig actor_opt_cfg() const {
    neural::AdamConfig c;
    c.lr = cfg_.actor_lr;
    c.kind = cfg_.optimizer;
    return c;
  }
  neural::AdamConfig critic_opt_cfg() const {
    neural::AdamConfig c;
    c.lr = cfg_.critic_lr;
    c.kind = cfg_.optimizer;
    return c;
  }

  double critic_step(neural::Mlp<Scalar>& critic, neural::AdamState<Scalar>& opt, const Matrix& sa,
                     const Vector& y) {
    neural::ForwardCache<Scalar> cache;
    const Matrix q = critic(sa, &cache);
    const Vector diff = q.row(0).transpose() - y;
    const Scalar n = Scalar(sa.cols());
    const double loss = static_cast<double>(diff.squaredNorm() / n);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite critic loss after " << critic_updates_ << " updates (max |y| = "
          << y.cwiseAbs().maxCoeff() << ", max |Q| = " << q.cwiseAbs().maxCoeff() << ")";
      throw DomainError(msg.str());
    }
    const Matrix upstream = (Scalar(2) / n) * diff.transpose();
    const auto g = neural::backward(critic.spec, critic.params, cache, upstream);
    neural::adam_step(critic.params, g.params, opt, critic_opt_cfg());
    return loss;
  }

  Td3Config cfg_;
  int state_dim_;
  int action_dim_;
  neural::Mlp<Scalar> actor_, critic1_, critic2_;
  neural::Mlp<Scalar> actor_t_, critic1_t_, critic2_t_;
  neural::AdamState<Scalar> actor_opt_, critic1_opt_, critic2_opt_;
  std::int64_t critic_updates_ = 0;
  std::int64_t actor_updates_ = 0;
};

}  // namespace h2r::td3
