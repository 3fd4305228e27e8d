#include <doctest.h>

#include <random>

#include "h2r/neural/mlp.hpp"
#include "h2r/neural/optimizer.hpp"
#include "h2r/td3/agent.hpp"
#include "oracles.hpp"

using namespace h2r;
using namespace h2r::neural;

namespace {

MatX random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return MatX::NullaryExpr(r, c, [&] { return u(rng); });
}

// One linear layer without hidden units, built by hand since specs require a
// hidden layer.
MlpSpec linear_spec(int in, int out) {
  MlpSpec s;
  s.input = in;
  s.hidden = {};
  s.heads = {{Activation::Identity, out}};
  return s;
}

}  // namespace

TEST_SUITE("neural") {
  TEST_CASE("identity single layer returns its input") {
    const MlpSpec s = linear_spec(4, 4);
    ParamSet<double> p;
    p.weights = {MatX::Identity(4, 4)};
    p.biases = {VecX::Zero(4)};
    std::mt19937_64 rng(1);
    const MatX x = random_matrix(4, 5, rng);
    CHECK(forward(s, p, x) == x);
  }

  TEST_CASE("zero parameters give zero pre-activations") {
    MlpSpec s;
    s.input = 3;
    s.hidden = {5};
    s.heads = {{Activation::Identity, 2}};
    const ParamSet<double> p = ParamSet<double>::zeros(s);
    std::mt19937_64 rng(2);
    ForwardCache<double> cache;
    const MatX y = forward(s, p, random_matrix(3, 4, rng), &cache);
    CHECK(y.isZero(0.0));
    for (const auto& z : cache.pre) CHECK(z.isZero(0.0));
  }

  TEST_CASE("two-layer network matches a hand-rolled oracle") {
    MlpSpec s;
    s.input = 6;
    s.hidden = {9};
    s.hidden_activation = Activation::Tanh;
    s.heads = {{Activation::Identity, 3}};
    std::mt19937_64 rng(3);
    const ParamSet<double> p = init_params<double>(s, rng);
    const MatX x = random_matrix(6, 7, rng);
    const MatX y = forward(s, p, x);
    for (int c = 0; c < 7; ++c) {
      double h[9];
      for (int i = 0; i < 9; ++i) {
        double acc = p.biases[0](i);
        for (int j = 0; j < 6; ++j) acc += p.weights[0](i, j) * x(j, c);
        h[i] = std::tanh(acc);
      }
      for (int o = 0; o < 3; ++o) {
        double acc = p.biases[1](o);
        for (int i = 0; i < 9; ++i) acc += p.weights[1](o, i) * h[i];
        REQUIRE(std::abs(y(o, c) - acc) <= 1e-12);
      }
    }
  }

  TEST_CASE("input width mismatch is a shape error") {
    MlpSpec s;
    s.input = 3;
    s.hidden = {4};
    std::mt19937_64 rng(4);
    const auto p = init_params<double>(s, rng);
    CHECK_THROWS_AS(forward(s, p, MatX(MatX::Zero(2, 1))), ShapeError);
    s.hidden.clear();
    CHECK_THROWS_AS(s.validate(), ShapeError);
  }

  TEST_CASE("linear layer weight gradient is the outer product") {
    const MlpSpec s = linear_spec(3, 2);
    std::mt19937_64 rng(5);
    ParamSet<double> p;
    p.weights = {random_matrix(2, 3, rng)};
    p.biases = {random_matrix(2, 1, rng)};
    const MatX x = random_matrix(3, 1, rng);
    const MatX up = random_matrix(2, 1, rng);
    ForwardCache<double> cache;
    forward(s, p, x, &cache);
    const auto g = backward(s, p, cache, up);
    CHECK((g.params.weights[0] - up * x.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((g.params.biases[0] - up).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((g.input - p.weights[0].transpose() * up).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("zero upstream gives zero gradients") {
    MlpSpec s;
    s.input = 5;
    s.hidden = {7, 6};
    s.heads = {{Activation::Tanh, 2}, {Activation::Sigmoid, 1}};
    std::mt19937_64 rng(6);
    const auto p = init_params<double>(s, rng);
    ForwardCache<double> cache;
    forward(s, p, random_matrix(5, 4, rng), &cache);
    const auto g = backward(s, p, cache, MatX(MatX::Zero(3, 4)));
    CHECK(g.params.norm() == 0.0);
    CHECK(g.input.isZero(0.0));
  }

  TEST_CASE("gradients agree with central differences on random networks") {
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
      const MlpSpec s = oracle::random_spec(rng, 3, 16);
      const auto p = init_params<double>(s, rng);
      const MatX x = random_matrix(s.input, 2, rng);
      const MatX up = random_matrix(s.output(), 2, rng);
      worst = std::max(worst, oracle::gradient_check(s, p, x, up).max_rel_error);
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("Adam leaves parameters alone under a zero gradient") {
    MlpSpec s;
    s.input = 3;
    s.hidden = {4};
    std::mt19937_64 rng(8);
    auto p = init_params<double>(s, rng);
    const auto before = p;
    auto st = AdamState<double>::for_params(p);
    adam_step(p, ParamSet<double>::zeros_like(p), st, {});
    CHECK(p == before);
  }

  TEST_CASE("first Adam step moves each parameter by about the learning rate") {
    MlpSpec s;
    s.input = 3;
    s.hidden = {4};
    std::mt19937_64 rng(9);
    auto p = init_params<double>(s, rng);
    const auto before = p;
    auto g = ParamSet<double>::zeros_like(p);
    g.for_each([](double& x) { x = 0.37; });
    auto st = AdamState<double>::for_params(p);
    AdamConfig cfg;
    adam_step(p, g, st, cfg);
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
      const MatX d = before.weights[l] - p.weights[l];
      // m_hat = g and v_hat = g^2 after one step, so the move is lr * g / (|g| + eps).
      CHECK((d.array() - cfg.lr * 0.37 / (0.37 + cfg.eps)).abs().maxCoeff() < 1e-15);
    }
  }

  TEST_CASE("Adam matches a reference implementation over a random sequence") {
    MlpSpec s;
    s.input = 4;
    s.hidden = {5};
    s.heads = {{Activation::Identity, 2}};
    std::mt19937_64 rng(10);
    auto p = init_params<double>(s, rng);
    auto st = AdamState<double>::for_params(p);
    AdamConfig cfg;
    cfg.lr = 1e-2;
    // Reference state over a flat copy of the parameters.
    std::vector<double*> slots;
    p.for_each([&](double& x) { slots.push_back(&x); });
    std::vector<double> ref(slots.size()), m(slots.size(), 0.0), v(slots.size(), 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i) ref[i] = *slots[i];
    std::normal_distribution<double> nd(0, 1);
    for (int t = 1; t <= 200; ++t) {
      auto g = ParamSet<double>::zeros_like(p);
      std::vector<double> flat;
      g.for_each([&](double& x) {
        x = nd(rng);
        flat.push_back(x);
      });
      adam_step(p, g, st, cfg);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * flat[i];
        v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * flat[i] * flat[i];
        const double mh = m[i] / (1 - std::pow(cfg.beta1, t));
        const double vh = v[i] / (1 - std::pow(cfg.beta2, t));
        ref[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
      }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(*slots[i] - ref[i]));
    CHECK(worst < 1e-10);
  }

  TEST_CASE("non-finite gradients are rejected") {
    MlpSpec s;
    s.input = 2;
    s.hidden = {2};
    std::mt19937_64 rng(11);
    auto p = init_params<double>(s, rng);
    const auto before = p;
    auto g = ParamSet<double>::zeros_like(p);
    g.weights[0](0, 0) = std::nan("");
    auto st = AdamState<double>::for_params(p);
    CHECK_THROWS_AS(adam_step(p, g, st, {}), DomainError);
    CHECK(p == before);
  }

  TEST_CASE("soft update endpoints and interpolation") {
    ParamSet<double> target, source;
    target.weights = {MatX::Zero(1, 1)};
    target.biases = {VecX::Zero(1)};
    source.weights = {MatX::Ones(1, 1)};
    source.biases = {VecX::Ones(1)};
    auto t = target;
    soft_update(t, source, 0.005);
    CHECK(t.weights[0](0, 0) == doctest::Approx(0.005).epsilon(1e-15));
    t = target;
    soft_update(t, source, 0.0);
    CHECK(t == target);
    t = target;
    soft_update(t, source, 1.0);
    CHECK(t == source);
    CHECK_THROWS_AS(soft_update(t, source, 1.5), DomainError);
  }

  TEST_CASE("soft updates never increase the distance to the source") {
    MlpSpec s;
    s.input = 4;
    s.hidden = {8};
    std::mt19937_64 rng(12);
    const auto source = init_params<double>(s, rng);
    auto target = init_params<double>(s, rng);
    std::uniform_real_distribution<double> u(1e-4, 1.0);
    const auto dist = [&] {
      double d = 0;
      for (std::size_t l = 0; l < source.weights.size(); ++l)
        d += (source.weights[l] - target.weights[l]).squaredNorm() + (source.biases[l] - target.biases[l]).squaredNorm();
      return std::sqrt(d);
    };
    for (int k = 0; k < 100; ++k) {
      const double before = dist();
      soft_update(target, source, u(rng));
      REQUIRE(dist() <= before);
    }
  }

  TEST_CASE("identical seeds give identical initializations") {
    const MlpSpec s = td3::actor_spec(37, 7, {64, 64});
    std::mt19937_64 a(13), b(13);
    CHECK(init_params<double>(s, a) == init_params<double>(s, b));
  }

  TEST_CASE("actor outputs stay inside the action bounds") {
    const MlpSpec s = td3::actor_spec(37, 7, {32, 32});
    std::mt19937_64 rng(14);
    auto p = init_params<double>(s, rng);
    // Large weights push the squashing functions into saturation.
    p.for_each([](double& x) { x *= 50.0; });
    const MatX x = random_matrix(37, 100000, rng, 10.0);
    const MatX y = forward(s, p, x);
    CHECK(y.topRows(6).minCoeff() >= -1.0);
    CHECK(y.topRows(6).maxCoeff() <= 1.0);
    CHECK(y.row(6).minCoeff() >= 0.0);
    CHECK(y.row(6).maxCoeff() <= 1.0);
  }

  TEST_CASE("parameters round-trip through JSON") {
    const MlpSpec s = td3::critic_spec(37, 7, {16});
    std::mt19937_64 rng(15);
    const auto p = init_params<double>(s, rng);
    CHECK(params_from_json<double>(nlohmann::json::parse(params_to_json(p).dump())) == p);
    CHECK(spec_from_json(spec_to_json(s)) == s);
  }
}
