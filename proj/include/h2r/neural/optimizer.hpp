#pragma once

#include <cmath>
#include <cstdint>

#include <json.hpp>

#include "h2r/neural/mlp.hpp"

namespace h2r::neural {

enum class OptimizerKind { Adam, Sgd };

struct AdamConfig {
  double lr = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  OptimizerKind kind = OptimizerKind::Adam;
};

template <typename Scalar>
struct AdamState {
  ParamSet<Scalar> m;
  ParamSet<Scalar> v;
  std::int64_t step = 0;

  static AdamState for_params(const ParamSet<Scalar>& p) {
    return {ParamSet<Scalar>::zeros_like(p), ParamSet<Scalar>::zeros_like(p), 0};
  }
};

namespace detail {

template <typename Derived, typename DerivedG, typename DerivedM>
void adam_update(const Eigen::MatrixBase<Derived>& p_, const Eigen::MatrixBase<DerivedG>& g,
                 const Eigen::MatrixBase<DerivedM>& m_, const Eigen::MatrixBase<DerivedM>& v_,
                 double lr_t, const AdamConfig& cfg, double eps_hat) {
  using Scalar = typename Derived::Scalar;
  auto& p = const_cast<Eigen::MatrixBase<Derived>&>(p_);
  auto& m = const_cast<Eigen::MatrixBase<DerivedM>&>(m_);
  auto& v = const_cast<Eigen::MatrixBase<DerivedM>&>(v_);
  const Scalar b1 = Scalar(cfg.beta1), b2 = Scalar(cfg.beta2);
  m = b1 * m + (Scalar(1) - b1) * g;
  v = b2 * v + (Scalar(1) - b2) * g.cwiseAbs2();
  p.array() -= Scalar(lr_t) * m.array() / (v.array().sqrt() + Scalar(eps_hat));
}

}  // namespace detail

// One optimizer step. Adam uses the bias-corrected form
//   p -= lr * m_hat / (sqrt(v_hat) + eps).
// Throws DomainError on non-finite gradients, leaving params untouched.
template <typename Scalar>
void adam_step(ParamSet<Scalar>& params, const ParamSet<Scalar>& grads, AdamState<Scalar>& state,
               const AdamConfig& cfg) {
  if (!params.same_shape(grads)) throw ShapeError("gradient shapes differ from parameter shapes");
  if (!grads.all_finite()) throw DomainError("non-finite gradient rejected by optimizer");
  if (cfg.kind == OptimizerKind::Sgd) {
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      params.weights[l] -= Scalar(cfg.lr) * grads.weights[l];
      params.biases[l] -= Scalar(cfg.lr) * grads.biases[l];
    }
    ++state.step;
    return;
  }
  if (state.m.weights.empty()) state = AdamState<Scalar>::for_params(params);
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  // Folding the bias corrections into the step size and epsilon gives the
  // same update as correcting m and v explicitly.
  const double lr_t = cfg.lr * std::sqrt(bc2) / bc1;
  const double eps_hat = cfg.eps * std::sqrt(bc2);
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    detail::adam_update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l],
                        lr_t, cfg, eps_hat);
    detail::adam_update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l],
                        lr_t, cfg, eps_hat);
  }
}

template <typename Scalar>
nlohmann::json adam_to_json(const AdamState<Scalar>& s) {
  return {{"step", s.step}, {"m", params_to_json(s.m)}, {"v", params_to_json(s.v)}};
}

template <typename Scalar>
AdamState<Scalar> adam_from_json(const nlohmann::json& j) {
  AdamState<Scalar> s;
  s.step = j.at("step").get<std::int64_t>();
  s.m = params_from_json<Scalar>(j.at("m"));
  s.v = params_from_json<Scalar>(j.at("v"));
  return s;
}

}  // namespace h2r::neural
