#include <doctest.h>

#include <random>
#include <set>

#include "h2r/agentio/observation.hpp"
#include "h2r/agentio/replay_buffer.hpp"
#include "h2r/agentio/welford.hpp"
#include "h2r/env/environment.hpp"
#include "oracles.hpp"

using namespace h2r;
using namespace h2r::agentio;

namespace {

env::Snapshot scene(std::uint64_t seed, env::Task task = env::Task::Pick) {
  env::Environment e(env::EnvConfig{});
  return e.reset(seed, task);
}

Transition<double> transition(double tag) {
  Transition<double> t;
  t.state = VecX::Constant(3, tag);
  t.next_state = VecX::Constant(3, tag + 0.5);
  t.action = VecX::Constant(2, -tag);
  t.reward = tag;
  return t;
}

}  // namespace

TEST_SUITE("agentio") {
  TEST_CASE("state vector has 37 entries in the documented order") {
    env::Snapshot s = scene(1);
    ActionVec prev;
    prev << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7;
    s.joints.velocities << 1, 2, 3, 4, 5, 6;
    s.suction_contact = true;
    const RawObservation o = assemble_state(s, prev);
    CHECK(o.values.size() == 37);
    const auto& t = s.target();
    CHECK(o.joints() == s.joints.positions);
    CHECK(o.joint_velocities() == s.joints.velocities);
    CHECK(o.object_quat()(0) == t.pose.orientation.w());
    CHECK(o.object_quat().tail<3>() == t.pose.orientation.vec());
    CHECK(o.ee_to_object() == t.grasp_point() - s.ee.position);
    CHECK(o.object_to_goal() == s.goal - t.pose.position);
    CHECK(o.object_position() == t.pose.position);
    CHECK(o.goal_position() == s.goal);
    CHECK(o.suction()(0) == 1.0);
    CHECK(o.suction()(1) == 1.0);
    CHECK(o.prev_action() == prev);
    CHECK(std::abs(o.object_quat().norm() - 1.0) < 1e-12);
  }

  TEST_CASE("coincident points give zero relative vectors") {
    env::Snapshot s = scene(2);
    auto& t = s.objects[s.target_id];
    s.ee.position = t.grasp_point();
    s.goal = t.pose.position;
    const RawObservation o = assemble_state(s, ActionVec::Zero());
    CHECK(o.ee_to_object().isZero(0.0));
    CHECK(o.object_to_goal().isZero(0.0));
  }

  TEST_CASE("missing target is a state error") {
    env::Snapshot s = scene(3);
    s.target_id = 99;
    CHECK_THROWS_AS(assemble_state(s, ActionVec::Zero()), StateError);
  }

  TEST_CASE("zero-width noise leaves the observation unchanged") {
    const RawObservation o = assemble_state(scene(4), ActionVec::Constant(0.2));
    std::mt19937_64 rng(1);
    CHECK(inject_noise(o, rng, NoiseWidths::none()).values == o.values);
  }

  TEST_CASE("position noise is uniform within its width and unbiased") {
    const RawObservation o = assemble_state(scene(5), ActionVec::Constant(0.2));
    std::mt19937_64 rng(2);
    const int n = 100000;
    double sum = 0.0, lo = 1e9, hi = -1e9;
    double vsum = 0.0, vlo = 1e9, vhi = -1e9;
    for (int i = 0; i < n; ++i) {
      const RawObservation r = inject_noise(o, rng);
      const double d = r.values(layout::kObjectPos) - o.values(layout::kObjectPos);
      sum += d;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      const double dv = r.values(layout::kJointVel) - o.values(layout::kJointVel);
      vsum += dv;
      vlo = std::min(vlo, dv);
      vhi = std::max(vhi, dv);
      REQUIRE(r.prev_action() == o.prev_action());
    }
    const double sigma = 0.005 / std::sqrt(3.0);
    CHECK(std::abs(sum / n) < 3 * sigma / std::sqrt(double(n)));
    CHECK(lo >= -0.005);
    CHECK(hi <= 0.005);
    CHECK(hi - lo > 0.0099);
    CHECK(std::abs(vsum / n) < 3 * (0.05 / std::sqrt(3.0)) / std::sqrt(double(n)));
    CHECK(vlo >= -0.05);
    CHECK(vhi <= 0.05);
  }

  TEST_CASE("Welford on [1, 2, 3]") {
    Welford<double> w(1);
    for (double x : {1.0, 2.0, 3.0}) w.update(Eigen::Matrix<double, 1, 1>(x));
    CHECK(w.mean()(0) == 2.0);
    CHECK(w.variance()(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("Welford single sample") {
    Welford<double> w(3);
    w.update(Vec3(1.5, -2, 7));
    CHECK(w.mean() == Vec3(1.5, -2, 7));
    CHECK(w.m2().isZero(0.0));
    CHECK(w.count() == 1);
  }

  TEST_CASE("Welford matches two-pass statistics") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    StateNormalizer w;
    std::vector<std::vector<double>> xs;
    for (int i = 0; i < 20000; ++i) {
      std::vector<double> x(37);
      StateVec v;
      for (int k = 0; k < 37; ++k) v(k) = x[k] = 5.0 * k + (1 + k) * nd(rng);
      w.update(v);
      xs.push_back(std::move(x));
    }
    const auto m = oracle::two_pass(xs);
    for (int k = 0; k < 37; ++k) {
      CHECK(std::abs(w.mean()(k) - m.mean[k]) <= 1e-9 * std::max(1.0, std::abs(m.mean[k])));
      CHECK(std::abs(w.variance()(k) - m.var[k]) <= 1e-9 * m.var[k]);
    }
  }

  TEST_CASE("normalize") {
    Welford<double> w(2);
    CHECK_THROWS_AS(w.normalize(Eigen::Vector2d(1, 1)), StateError);
    for (int i = 0; i < 10; ++i) w.update(Eigen::Vector2d(3, -1));
    CHECK(w.normalize(Eigen::Vector2d(3, -1)).isZero(0.0));

    Welford<double> r(4);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 1000; ++i) r.update(Eigen::Vector4d(u(rng), u(rng), u(rng), u(rng)));
    CHECK(r.normalize(r.mean()).isZero(0.0));
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
      const Eigen::Vector4d got = r.normalize(x);
      for (int k = 0; k < 4; ++k) {
        const double ref = (x(k) - r.mean()(k)) / (std::sqrt(r.m2()(k) / r.count()) + 1e-7);
        REQUIRE(std::abs(got(k) - ref) <= 1e-12);
      }
    }
  }

  TEST_CASE("a standardized stream has zero mean and unit variance") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(4.0, 3.0);
    Welford<double> stats(1), check(1);
    std::vector<double> xs(100000);
    for (double& x : xs) {
      x = nd(rng);
      stats.update(Eigen::Matrix<double, 1, 1>(x));
    }
    for (double x : xs) check.update(stats.normalize(Eigen::Matrix<double, 1, 1>(x)));
    CHECK(std::abs(check.mean()(0)) < 1e-2);
    CHECK(std::abs(check.variance()(0) - 1.0) < 1e-2);
  }

  TEST_CASE("normalizer state round-trips through JSON bit-exactly") {
    StateNormalizer w;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 50; ++i) w.update(StateVec::NullaryExpr([&] { return u(rng); }));
    const StateNormalizer back = StateNormalizer::from_json(nlohmann::json::parse(w.to_json().dump()));
    CHECK(back.mean() == w.mean());
    CHECK(back.m2() == w.m2());
    CHECK(back.count() == w.count());
  }

  TEST_CASE("replay buffer evicts in insertion order") {
    ReplayBuffer<double> b(3, 3, 2);
    for (int i = 0; i < 4; ++i) b.push(transition(i));
    CHECK(b.size() == 3);
    std::set<double> rewards;
    for (std::size_t i = 0; i < b.size(); ++i) rewards.insert(b.at(i).reward);
    CHECK(rewards == std::set<double>{1, 2, 3});
    for (int i = 4; i < 20; ++i) {
      b.push(transition(i));
      REQUIRE(b.size() <= b.capacity());
      std::uint64_t oldest = ~0ull;
      for (std::size_t s = 0; s < b.size(); ++s) oldest = std::min(oldest, b.id_at(s));
      REQUIRE(oldest == static_cast<std::uint64_t>(i) - 2);
    }
  }

  TEST_CASE("replay buffer sampling") {
    ReplayBuffer<double> b(100000, 3, 2);
    std::mt19937_64 rng(7);
    CHECK_THROWS_AS(b.sample(1, rng), StateError);
    for (int i = 0; i < 10000; ++i) b.push(transition(i));
    const Batch<double> batch = b.sample(256, rng);
    CHECK(batch.size() == 256);
    CHECK(batch.states.rows() == 3);
    CHECK(batch.actions.rows() == 2);
    for (Eigen::Index c = 0; c < batch.size(); ++c) {
      CHECK(batch.states(0, c) == batch.rewards(c));
      CHECK(batch.next_states(0, c) == batch.rewards(c) + 0.5);
    }
    const auto idx = b.sample_indices(256, rng);
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 256);
  }

  TEST_CASE("sampled indices are uniform") {
    const std::size_t n = 100;
    ReplayBuffer<double> b(n, 3, 2);
    for (std::size_t i = 0; i < n; ++i) b.push(transition(double(i)));
    std::mt19937_64 rng(8);
    std::vector<double> counts(n, 0.0);
    const int draws = 100000, batch = 10;
    for (int k = 0; k < draws / batch; ++k)
      for (std::size_t i : b.sample_indices(batch, rng)) counts[i] += 1;
    const double expected = double(draws) / n;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // Upper 0.001 quantile of chi-square with 99 degrees of freedom.
    CHECK(chi2 < 148.23);
  }

  TEST_CASE("non-finite or misshapen transitions are rejected") {
    ReplayBuffer<double> b(10, 3, 2);
    Transition<double> t = transition(1);
    t.reward = std::nan("");
    CHECK_THROWS_AS(b.push(t), DomainError);
    t = transition(1);
    t.state = VecX::Zero(4);
    CHECK_THROWS_AS(b.push(t), ShapeError);
    CHECK_THROWS_AS(ReplayBuffer<double>(0, 3, 2), ConfigError);
  }
}
