#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2r/common/errors.hpp"
#include "h2r/common/types.hpp"

namespace h2r::neural {

enum class Activation { Identity, Relu, Tanh, Sigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// A contiguous group of output units sharing one output activation.
struct OutputHead {
  Activation activation = Activation::Identity;
  int width = 1;
  friend bool operator==(const OutputHead&, const OutputHead&) = default;
};

struct MlpSpec {
  int input = 1;
  std::vector<int> hidden;
  Activation hidden_activation = Activation::Relu;
  std::vector<OutputHead> heads{{Activation::Identity, 1}};

  int output() const {
    int n = 0;
    for (const auto& h : heads) n += h.width;
    return n;
  }
  int layers() const { return static_cast<int>(hidden.size()) + 1; }
  // Fan-in and fan-out of layer l.
  int in_width(int l) const { return l == 0 ? input : hidden[l - 1]; }
  int out_width(int l) const { return l == layers() - 1 ? output() : hidden[l]; }

  void validate() const;
  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

nlohmann::json spec_to_json(const MlpSpec& spec);
MlpSpec spec_from_json(const nlohmann::json& j);

// Weights (out x in) and biases per layer. Also used for gradients and
// optimizer moments, which mirror the parameter shapes.
template <typename Scalar>
struct ParamSet {
  std::vector<MatrixX<Scalar>> weights;
  std::vector<VectorX<Scalar>> biases;

  static ParamSet zeros_like(const ParamSet& other) {
    ParamSet p;
    for (const auto& w : other.weights) p.weights.push_back(MatrixX<Scalar>::Zero(w.rows(), w.cols()));
    for (const auto& b : other.biases) p.biases.push_back(VectorX<Scalar>::Zero(b.size()));
    return p;
  }
  static ParamSet zeros(const MlpSpec& spec) {
    ParamSet p;
    for (int l = 0; l < spec.layers(); ++l) {
      p.weights.push_back(MatrixX<Scalar>::Zero(spec.out_width(l), spec.in_width(l)));
      p.biases.push_back(VectorX<Scalar>::Zero(spec.out_width(l)));
    }
    return p;
  }

  bool same_shape(const ParamSet& o) const {
    if (weights.size() != o.weights.size() || biases.size() != o.biases.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (weights[l].rows() != o.weights[l].rows() || weights[l].cols() != o.weights[l].cols() ||
          biases[l].size() != o.biases[l].size())
        return false;
    }
    return true;
  }

  bool all_finite() const {
    for (const auto& w : weights)
      if (!w.allFinite()) return false;
    for (const auto& b : biases)
      if (!b.allFinite()) return false;
    return true;
  }

  // Euclidean norm over every parameter.
  Scalar norm() const {
    Scalar s = Scalar(0);
    for (const auto& w : weights) s += w.squaredNorm();
    for (const auto& b : biases) s += b.squaredNorm();
    return std::sqrt(s);
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
  }

  // Visits every scalar in a fixed order: weights then biases, layer by layer.
  template <typename F>
  void for_each(F&& f) {
    for (auto& w : weights)
      for (Eigen::Index i = 0; i < w.size(); ++i) f(w.data()[i]);
    for (auto& b : biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) f(b.data()[i]);
  }

  template <typename Other>
  ParamSet<Other> cast() const {
    ParamSet<Other> p;
    for (const auto& w : weights) p.weights.push_back(w.template cast<Other>());
    for (const auto& b : biases) p.biases.push_back(b.template cast<Other>());
    return p;
  }

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    if (!a.same_shape(b)) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l)
      if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    return true;
  }
};

// Intermediate values of one forward pass, needed by backward().
template <typename Scalar>
struct ForwardCache {
  MatrixX<Scalar> input;
  std::vector<MatrixX<Scalar>> pre;   // pre-activations per layer
  std::vector<MatrixX<Scalar>> post;  // activations per layer (last = output)
};

template <typename Scalar>
struct Gradients {
  ParamSet<Scalar> params;
  MatrixX<Scalar> input;
};

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + std::exp(-x))
                        : std::exp(x) / (Scalar(1) + std::exp(x));
}

// Writes through const refs so that block expressions can be passed directly.
template <typename Derived>
void apply_activation(Activation a, const Eigen::MatrixBase<Derived>& z_) {
  using Scalar = typename Derived::Scalar;
  auto& z = const_cast<Eigen::MatrixBase<Derived>&>(z_);
  switch (a) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      z = z.cwiseMax(Scalar(0));
      break;
    case Activation::Tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::Sigmoid:
      z = z.unaryExpr([](Scalar x) { return sigmoid(x); });
      break;
  }
}

// d(activation)/d(pre) expressed through the activation output `y`, and the
// pre-activation `z` for the rectifier.
template <typename DerivedG, typename DerivedZ, typename DerivedY>
void scale_by_derivative(Activation a, const Eigen::MatrixBase<DerivedG>& g_,
                         const Eigen::MatrixBase<DerivedZ>& z,
                         const Eigen::MatrixBase<DerivedY>& y) {
  using Scalar = typename DerivedG::Scalar;
  auto& g = const_cast<Eigen::MatrixBase<DerivedG>&>(g_);
  switch (a) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      g = (z.array() > Scalar(0)).select(g.array(), Scalar(0)).matrix();
      break;
    case Activation::Tanh:
      g = g.cwiseProduct((Scalar(1) - y.array().square()).matrix());
      break;
    case Activation::Sigmoid:
      g = g.cwiseProduct((y.array() * (Scalar(1) - y.array())).matrix());
      break;
  }
}

}  // namespace detail

// Evaluates the network on `input` (one sample per column).
template <typename Scalar>
MatrixX<Scalar> forward(const MlpSpec& spec, const ParamSet<Scalar>& params,
                        const MatrixX<Scalar>& input, ForwardCache<Scalar>* cache = nullptr) {
  if (input.rows() != spec.input)
    throw ShapeError("network input has " + std::to_string(input.rows()) + " rows, expected " +
                     std::to_string(spec.input));
  if (static_cast<int>(params.weights.size()) != spec.layers())
    throw ShapeError("parameter set does not match network spec");
  if (cache) {
    cache->input = input;
    cache->pre.resize(spec.layers());
    cache->post.resize(spec.layers());
  }
  MatrixX<Scalar> x = input;
  for (int l = 0; l < spec.layers(); ++l) {
    MatrixX<Scalar> z = params.weights[l] * x;
    z.colwise() += params.biases[l];
    if (cache) cache->pre[l] = z;
    if (l < spec.layers() - 1) {
      detail::apply_activation(spec.hidden_activation, z);
    } else {
      Eigen::Index row = 0;
      for (const auto& head : spec.heads) {
        detail::apply_activation(head.activation, z.middleRows(row, head.width));
        row += head.width;
      }
    }
    if (cache) cache->post[l] = z;
    x = std::move(z);
  }
  return x;
}

// Reverse-mode gradients of sum(upstream .* output) with respect to every
// parameter and the input, for the forward pass recorded in `cache`.
template <typename Scalar>
Gradients<Scalar> backward(const MlpSpec& spec, const ParamSet<Scalar>& params,
                           const ForwardCache<Scalar>& cache, const MatrixX<Scalar>& upstream) {
  const int L = spec.layers();
  if (static_cast<int>(cache.post.size()) != L)
    throw ShapeError("backward() without a matching forward() cache");
  if (upstream.rows() != spec.output() || upstream.cols() != cache.input.cols())
    throw ShapeError("upstream gradient shape does not match network output");
  Gradients<Scalar> g;
  g.params = ParamSet<Scalar>::zeros_like(params);
  MatrixX<Scalar> delta = upstream;
  for (int l = L - 1; l >= 0; --l) {
    if (l == L - 1) {
      Eigen::Index row = 0;
      for (const auto& head : spec.heads) {
        detail::scale_by_derivative(head.activation, delta.middleRows(row, head.width),
                                    cache.pre[l].middleRows(row, head.width),
                                    cache.post[l].middleRows(row, head.width));
        row += head.width;
      }
    } else {
      detail::scale_by_derivative(spec.hidden_activation, delta, cache.pre[l], cache.post[l]);
    }
    const MatrixX<Scalar>& x = l == 0 ? cache.input : cache.post[l - 1];
    g.params.weights[l].noalias() = delta * x.transpose();
    g.params.biases[l] = delta.rowwise().sum();
    MatrixX<Scalar> next = params.weights[l].transpose() * delta;
    delta = std::move(next);
  }
  g.input = std::move(delta);
  return g;
}

// Uniform fan-in initialization U(-1/sqrt(fan_in), 1/sqrt(fan_in)); the last
// layer is multiplied by `last_layer_scale`.
template <typename Scalar>
ParamSet<Scalar> init_params(const MlpSpec& spec, std::mt19937_64& rng,
                             double last_layer_scale = 1.0) {
  spec.validate();
  ParamSet<Scalar> p = ParamSet<Scalar>::zeros(spec);
  for (int l = 0; l < spec.layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.in_width(l)));
    const double scale = l == spec.layers() - 1 ? last_layer_scale : 1.0;
    std::uniform_real_distribution<double> d(-bound, bound);
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i)
      p.weights[l].data()[i] = Scalar(scale * d(rng));
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i)
      p.biases[l].data()[i] = Scalar(scale * d(rng));
  }
  return p;
}

// Network spec and parameters together.
template <typename Scalar>
struct Mlp {
  MlpSpec spec;
  ParamSet<Scalar> params;

  MatrixX<Scalar> operator()(const MatrixX<Scalar>& x, ForwardCache<Scalar>* cache = nullptr) const {
    return forward(spec, params, x, cache);
  }
};

// Componentwise target <- target + rho * (source - target). The incremental
// form keeps every entry between its old value and the source.
template <typename Scalar>
void soft_update(ParamSet<Scalar>& target, const ParamSet<Scalar>& source, double rho) {
  if (!target.same_shape(source)) throw ShapeError("soft_update on mismatched parameter sets");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("soft update rate must lie in [0, 1]");
  if (rho == 1.0) {
    target = source;
    return;
  }
  if (rho == 0.0) return;
  const Scalar r = Scalar(rho);
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    target.weights[l] += r * (source.weights[l] - target.weights[l]);
    target.biases[l] += r * (source.biases[l] - target.biases[l]);
  }
}

template <typename Scalar>
nlohmann::json params_to_json(const ParamSet<Scalar>& p) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const auto& w = p.weights[l];
    const auto& b = p.biases[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"w", std::vector<Scalar>(w.data(), w.data() + w.size())},
                      {"b", std::vector<Scalar>(b.data(), b.data() + b.size())}});
  }
  return layers;
}

template <typename Scalar>
ParamSet<Scalar> params_from_json(const nlohmann::json& j) {
  ParamSet<Scalar> p;
  for (const auto& layer : j) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("w").get<std::vector<Scalar>>();
    const auto b = layer.at("b").get<std::vector<Scalar>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows)
      throw ShapeError("checkpoint layer has inconsistent sizes");
    p.weights.push_back(Eigen::Map<const MatrixX<Scalar>>(w.data(), rows, cols));
    p.biases.push_back(Eigen::Map<const VectorX<Scalar>>(b.data(), rows));
  }
  return p;
}

}  // namespace h2r::neural
