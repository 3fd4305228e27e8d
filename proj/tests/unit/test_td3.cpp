#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "h2r/td3/agent.hpp"
#include "h2r/td3/evaluate.hpp"
#include "h2r/td3/scripted.hpp"
#include "h2r/td3/trainer.hpp"

using namespace h2r;
using namespace h2r::td3;

namespace {

Td3Config small_config() {
  Td3Config c;
  c.hidden = {16, 16};
  c.batch_size = 8;
  c.buffer_capacity = 1000;
  return c;
}

agentio::Batch<double> random_batch(int n, std::mt19937_64& rng, int state_dim = 5, int action_dim = 3) {
  std::uniform_real_distribution<double> u(-1, 1);
  agentio::Batch<double> b;
  b.states = MatX::NullaryExpr(state_dim, n, [&] { return u(rng); });
  b.next_states = MatX::NullaryExpr(state_dim, n, [&] { return u(rng); });
  b.actions = MatX::NullaryExpr(action_dim, n, [&] { return u(rng); });
  b.rewards = VecX::NullaryExpr(n, [&] { return u(rng); });
  b.dones = VecX::Zero(n);
  return b;
}

// Makes a critic output the constant `q` for every input.
void make_constant(neural::Mlp<double>& critic, double q) {
  critic.params.weights.back().setZero();
  critic.params.biases.back().setConstant(q);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

TrainConfig tiny_train(std::uint64_t seed, int episodes, const std::string& out = {}) {
  TrainConfig c;
  c.env = env::simplified_3dof_config();
  c.env.max_steps = 20;
  c.td3 = small_config();
  c.td3.warmup = 30;
  c.td3.batch_size = 16;
  c.episodes = episodes;
  c.seed = seed;
  c.eval_every = 2;
  c.eval_episodes = 2;
  c.checkpoint_every = 2;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_SUITE("td3") {
  TEST_CASE("greedy actions are deterministic") {
    Td3Agent<double> agent(5, 3, small_config(), 1);
    std::mt19937_64 rng(1);
    const VecX s = VecX::LinSpaced(5, -1, 1);
    CHECK(agent.select_action(s, false, rng) == agent.select_action(s, false, rng));
    CHECK(agent.select_action(s, true, rng, 0.0) == agent.act(s));
  }

  TEST_CASE("exploration noise has the configured spread") {
    Td3Agent<double> agent(5, 7, small_config(), 2);
    std::mt19937_64 rng(2);
    const VecX s = VecX::Zero(5);
    const VecX mu = agent.act(s);
    double sum = 0, sq = 0;
    long n = 0;
    for (int k = 0; k < 100000; ++k) {
      const VecX a = agent.select_action(s, true, rng);
      for (int i = 0; i < 6; ++i) {
        const double d = a(i) - mu(i);
        sum += d;
        sq += d * d;
        ++n;
      }
      REQUIRE(a(6) >= 0.0);
      REQUIRE(a(6) <= 1.0);
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(sd - 0.2) < 0.002);
  }

  TEST_CASE("target uses the smaller target critic") {
    Td3Config c = small_config();
    c.gamma = 0.99;
    Td3Agent<double> agent(5, 3, c, 3);
    make_constant(agent.critic1_target(), 2.0);
    make_constant(agent.critic2_target(), 3.0);
    std::mt19937_64 rng(3);
    auto b = random_batch(4, rng);
    b.rewards.setConstant(1.0);
    b.dones << 0, 1, 0, 1;
    const auto t = agent.compute_target(b, rng);
    CHECK(t.y(0) == doctest::Approx(2.98).epsilon(1e-15));
    CHECK(t.y(1) == 1.0);
    CHECK(t.y(2) == doctest::Approx(2.98).epsilon(1e-15));
    CHECK(t.y(3) == 1.0);
  }

  TEST_CASE("target smoothing noise is clipped") {
    Td3Config c = small_config();
    c.target_sigma = 5.0;
    c.actor_last_layer_scale = 0.0;
    Td3Agent<double> agent(5, 3, c, 4);
    std::mt19937_64 rng(4);
    const auto b = random_batch(1000, rng);
    const MatX base = agent.actor_target()(b.next_states);
    double lo = 0, hi = 0;
    for (int rep = 0; rep < 100; ++rep) {
      const auto t = agent.compute_target(b, rng);
      const MatX eps = t.next_actions - base;
      lo = std::min(lo, eps.topRows(2).minCoeff());
      hi = std::max(hi, eps.topRows(2).maxCoeff());
    }
    CHECK(lo >= -0.5);
    CHECK(hi <= 0.5);
    CHECK(lo == -0.5);
    CHECK(hi == 0.5);
  }

  TEST_CASE("critic loss vanishes when the critics already hit the target") {
    Td3Agent<double> agent(5, 3, small_config(), 5);
    make_constant(agent.critic1(), 0.7);
    make_constant(agent.critic2(), 0.7);
    const auto p1 = agent.critic1().params;
    std::mt19937_64 rng(5);
    const auto b = random_batch(8, rng);
    const auto [l1, l2] = agent.critic_update(b, VecX::Constant(8, 0.7));
    CHECK(l1 == 0.0);
    CHECK(l2 == 0.0);
    CHECK(agent.critic1().params == p1);
  }

  TEST_CASE("critic loss is the mean squared TD error") {
    Td3Agent<double> agent(5, 3, small_config(), 6);
    std::mt19937_64 rng(6);
    const auto b = random_batch(8, rng);
    const VecX y = VecX::LinSpaced(8, -1, 1);
    MatX sa(8, 8);
    sa << b.states, b.actions;
    const VecX q1 = agent.critic1()(sa).row(0).transpose();
    const VecX q2 = agent.critic2()(sa).row(0).transpose();
    double ref1 = 0, ref2 = 0;
    for (int i = 0; i < 8; ++i) {
      ref1 += (q1(i) - y(i)) * (q1(i) - y(i)) / 8;
      ref2 += (q2(i) - y(i)) * (q2(i) - y(i)) / 8;
    }
    const auto c1_before = agent.critic1().params;
    const auto c2_before = agent.critic2().params;
    const auto [l1, l2] = agent.critic_update(b, y);
    CHECK(std::abs(l1 - ref1) <= 1e-12);
    CHECK(std::abs(l2 - ref2) <= 1e-12);
    // Twins are updated separately and stay distinct.
    CHECK_FALSE(agent.critic1().params == c1_before);
    CHECK_FALSE(agent.critic2().params == c2_before);
    CHECK_FALSE(agent.critic1().params == agent.critic2().params);
  }

  TEST_CASE("actor updates every second critic update") {
    Td3Agent<double> agent(5, 3, small_config(), 7);
    std::mt19937_64 rng(7);
    for (int k = 1; k <= 10; ++k) {
      const auto st = agent.update(random_batch(8, rng), rng);
      CHECK(st.actor_updated == (k % 2 == 0));
      REQUIRE(agent.actor_updates() == agent.critic_updates() / 2);
    }
    CHECK(agent.critic_updates() == 10);
    CHECK(agent.actor_updates() == 5);
  }

  TEST_CASE("actor update off the delay schedule is refused") {
    Td3Agent<double> agent(5, 3, small_config(), 8);
    std::mt19937_64 rng(8);
    const auto b = random_batch(8, rng);
    CHECK_THROWS_AS(agent.actor_update(b), StateError);
    agent.critic_update(b, VecX::Zero(8));
    CHECK_THROWS_AS(agent.actor_update(b), StateError);
    agent.critic_update(b, VecX::Zero(8));
    CHECK_NOTHROW(agent.actor_update(b));
  }

  TEST_CASE("a constant critic gives the actor no gradient") {
    neural::Mlp<double> actor;
    actor.spec = actor_spec(5, 3, {8});
    std::mt19937_64 rng(9);
    actor.params = neural::init_params<double>(actor.spec, rng);
    const auto before = actor.params;
    auto opt = neural::AdamState<double>::for_params(actor.params);
    const auto critic = [](const MatX& s, const MatX& a) {
      return CriticEval<double>{VecX::Constant(s.cols(), 4.0), MatX::Zero(a.rows(), a.cols())};
    };
    const MatX states = MatX::Random(5, 16);
    const double loss = actor_gradient_step(actor, opt, {}, states, critic);
    CHECK(loss == -4.0);
    CHECK(actor.params == before);
  }

  TEST_CASE("actor converges to the optimum of a quadratic critic") {
    neural::Mlp<double> actor;
    actor.spec.input = 1;
    actor.spec.hidden = {8};
    actor.spec.heads = {{neural::Activation::Identity, 1}};
    std::mt19937_64 rng(10);
    actor.params = neural::init_params<double>(actor.spec, rng);
    auto opt = neural::AdamState<double>::for_params(actor.params);
    neural::AdamConfig cfg;
    cfg.lr = 1e-2;
    const double target = 0.37;
    const auto critic = [&](const MatX& s, const MatX& a) {
      CriticEval<double> ce;
      ce.q = (-(a.array() - target).square()).matrix().row(0).transpose();
      ce.dq_da = -2.0 * (a.array() - target).matrix();
      (void)s;
      return ce;
    };
    const MatX state = MatX::Constant(1, 1, 0.5);
    for (int k = 0; k < 2000; ++k) actor_gradient_step(actor, opt, cfg, state, critic);
    CHECK(std::abs(actor(state)(0, 0) - target) < 1e-3);
  }

  TEST_CASE("targets stay below both target critics at the noisy action") {
    Td3Agent<double> agent(5, 3, small_config(), 11);
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) agent.update(random_batch(8, rng), rng);
    auto b = random_batch(1000, rng);
    for (int i = 0; i < 1000; i += 7) b.dones(i) = 1.0;
    const auto t = agent.compute_target(b, rng);
    const double g = agent.config().gamma;
    for (int i = 0; i < 1000; ++i) {
      const double nd = 1.0 - b.dones(i);
      REQUIRE(t.y(i) <= b.rewards(i) + g * nd * t.q1(i) + 1e-12);
      REQUIRE(t.y(i) <= b.rewards(i) + g * nd * t.q2(i) + 1e-12);
    }
  }

  TEST_CASE("agent state round-trips through JSON") {
    Td3Agent<double> agent(5, 3, small_config(), 12);
    std::mt19937_64 rng(12);
    for (int k = 0; k < 6; ++k) agent.update(random_batch(8, rng), rng);
    const auto back = Td3Agent<double>::from_json(nlohmann::json::parse(agent.to_json().dump()));
    CHECK(back.to_json() == agent.to_json());
  }

  TEST_CASE("config validation") {
    Td3Config c;
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = Td3Config{};
    c.policy_delay = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = Td3Config{};
    c.noise_clip = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("a one-episode smoke run") {
    TrainConfig c = tiny_train(1, 1);
    c.env.max_steps = 5;
    c.eval_every = 0;
    Trainer<double> t(c);
    const TrainResult r = t.run();
    CHECK(r.curve.size() == 1);
    CHECK(r.curve[0].length <= 5);
    CHECK(t.buffer().size() == static_cast<std::size_t>(r.curve[0].length));
    CHECK(r.total_steps == r.curve[0].length);
  }

  TEST_CASE("identical seeds give identical learning curves and checkpoints") {
    const auto dir = std::filesystem::temp_directory_path() / "h2r_td3_repro";
    std::filesystem::remove_all(dir);
    Trainer<float> a(tiny_train(5, 6, (dir / "a").string()));
    Trainer<float> b(tiny_train(5, 6, (dir / "b").string()));
    const auto ra = a.run();
    const auto rb = b.run();
    REQUIRE(ra.curve.size() == rb.curve.size());
    for (std::size_t i = 0; i < ra.curve.size(); ++i) {
      CHECK(ra.curve[i].ret == rb.curve[i].ret);
      CHECK(ra.curve[i].termination == rb.curve[i].termination);
    }
    CHECK(slurp(dir / "a" / "metrics.jsonl") == slurp(dir / "b" / "metrics.jsonl"));
    CHECK(slurp(dir / "a" / "curves.csv") == slurp(dir / "b" / "curves.csv"));
    for (const char* f : {"checkpoint_2.ckpt", "checkpoint_4.ckpt", "final.ckpt", "best.ckpt"})
      CHECK(slurp(dir / "a" / "checkpoints" / f) == slurp(dir / "b" / "checkpoints" / f));
    // A different seed gives a different run.
    Trainer<float> c(tiny_train(6, 6));
    const auto rc = c.run();
    bool differ = false;
    for (std::size_t i = 0; i < rc.curve.size(); ++i) differ = differ || rc.curve[i].ret != ra.curve[i].ret;
    CHECK(differ);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("metrics lines carry return, length, termination and term sums") {
    const auto dir = std::filesystem::temp_directory_path() / "h2r_td3_metrics";
    std::filesystem::remove_all(dir);
    Trainer<float> t(tiny_train(2, 2, dir.string()));
    t.run();
    std::ifstream f(dir / "metrics.jsonl");
    std::string line;
    int episodes = 0, evals = 0;
    while (std::getline(f, line)) {
      const auto j = nlohmann::json::parse(line);
      if (j.value("kind", "") == "eval") {
        ++evals;
        continue;
      }
      ++episodes;
      CHECK(j.contains("return"));
      CHECK(j.contains("length"));
      CHECK(j.contains("termination"));
      CHECK(j["terms"].contains("c_w"));
    }
    CHECK(episodes == 2);
    CHECK(evals == 1);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("checkpoints restore the trained policy") {
    Trainer<double> t(tiny_train(3, 3));
    t.run();
    const auto loaded = load_checkpoint<double>(nlohmann::json::parse(t.checkpoint().dump()));
    const auto ref = t.policy();
    env::Environment e(env::simplified_3dof_config());
    const env::Snapshot s = e.reset(4);
    CHECK(loaded.policy()(s, ActionVec::Zero()) == ref(s, ActionVec::Zero()));
    CHECK(loaded.episode == 3);
  }

  TEST_CASE("the best validated policy is kept") {
    const auto dir = std::filesystem::temp_directory_path() / "h2r_td3_best";
    std::filesystem::remove_all(dir);
    TrainConfig c = tiny_train(7, 12, dir.string());
    c.eval_episodes = 10;
    Trainer<double> t(c);
    const TrainResult r = t.run();
    REQUIRE(r.evals.size() == 6);
    int expect = r.evals.front().episode;
    double best = r.evals.front().result.success_rate;
    for (const auto& e : r.evals)
      if (e.result.success_rate > best) {
        best = e.result.success_rate;
        expect = e.episode;
      }
    CHECK(r.best_episode == expect);
    CHECK(r.best_success_rate == best);

    const auto loaded = load_checkpoint<double>(nlohmann::json::parse(slurp(dir / "checkpoints" / "best.ckpt")));
    CHECK(loaded.episode == expect);
    env::Environment e(env::simplified_3dof_config());
    for (std::uint64_t k = 0; k < 5; ++k) {
      const env::Snapshot s = e.reset(k);
      CHECK(loaded.policy()(s, ActionVec::Zero()) == t.best_policy()(s, ActionVec::Zero()));
    }

    c.keep_best = false;
    c.out_dir.clear();
    Trainer<double> off(c);
    CHECK(off.run().best_episode == 0);
  }

  TEST_CASE("a policy that never moves fails a distant reach") {
    EvalSetup setup;
    setup.env = env::simplified_3dof_config();
    const auto still = [](const env::Snapshot&, const ActionVec&) { return ActionVec::Zero().eval(); };
    const EvalResult r = evaluate(still, setup, 20, 0.02);
    CHECK(r.success_rate == 0.0);
    CHECK(r.terminations.at("timeout") == 20);
  }

  TEST_CASE("the scripted controller solves reach") {
    EvalSetup setup;
    setup.env = env::simplified_3dof_config();
    const ScriptedPolicy policy(setup.env);
    const EvalResult r = evaluate(policy, setup, 50, 0.02);
    CHECK(r.success_rate == 1.0);
    CHECK(r.mean_length < 100);
  }

  TEST_CASE("threshold sweep gives one column per tolerance") {
    EvalSetup setup;
    setup.env = env::simplified_3dof_config();
    setup.env.task = env::Task::Pick;
    const ScriptedPolicy policy(setup.env);
    const auto cols = threshold_sweep(policy, setup, 10, {0.01, 0.02, 0.03, 0.04});
    REQUIRE(cols.size() == 4);
    for (std::size_t i = 1; i < cols.size(); ++i) CHECK(cols[i].success_rate >= cols[i - 1].success_rate);
    CHECK(cols[3].tolerance == 0.04);
  }

  TEST_CASE("evaluation traces one record per step") {
    EvalSetup setup;
    setup.env = env::simplified_3dof_config();
    int lines = 0;
    setup.trace = [&](const nlohmann::json& j) {
      ++lines;
      CHECK(j.at("state").size() == 37);
      CHECK(j.at("action").size() == 7);
      CHECK(j.at("reward").contains("total"));
    };
    const ScriptedPolicy policy(setup.env);
    const EvalResult r = evaluate(policy, setup, 3, 0.02);
    CHECK(lines == static_cast<int>(std::lround(r.mean_length * 3)));
  }
}
