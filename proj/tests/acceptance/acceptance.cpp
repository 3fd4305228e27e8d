// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "h2r/agentio/welford.hpp"
#include "h2r/command/pipeline.hpp"
#include "h2r/evalcli/config.hpp"
#include "h2r/evalcli/metrics.hpp"
#include "h2r/evalcli/run.hpp"
#include "h2r/reward/terms.hpp"
#include "h2r/td3/agent.hpp"
#include "h2r/vision/io.hpp"
#include "h2r/vision/sharpness.hpp"
#include "h2r/vision/synthetic.hpp"
#include "oracles.hpp"

using namespace h2r;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int prec = 4) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

std::array<double, 3> arr(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Outcome welford_oracle() {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::vector<double>> xs(100000, std::vector<double>(kStateDim));
  for (auto& x : xs)
    for (int k = 0; k < kStateDim; ++k) x[k] = 10.0 * k - 50.0 + (0.1 + k) * nd(rng);
  const auto t0 = std::chrono::steady_clock::now();
  agentio::StateNormalizer w;
  StateVec v;
  for (const auto& x : xs) {
    for (int k = 0; k < kStateDim; ++k) v(k) = x[k];
    w.update(v);
  }
  const double secs = seconds_since(t0);
  const auto m = oracle::two_pass(xs);
  double worst = 0.0;
  for (int k = 0; k < kStateDim; ++k) {
    worst = std::max(worst, std::abs(w.mean()(k) - m.mean[k]) / std::max(1e-300, std::abs(m.mean[k])));
    worst = std::max(worst, std::abs(w.variance()(k) - m.var[k]) / m.var[k]);
  }
  return {worst <= 1e-9 && secs < 2.0, "max rel err " + num(worst) + ", " + num(secs, 3) + " s"};
}

Outcome gradient_oracle() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int skips = 0;
  for (int k = 0; k < 100; ++k) {
    const neural::MlpSpec s = oracle::random_spec(rng, 3, 64);
    const auto p = neural::init_params<double>(s, rng);
    const MatX x = MatX::NullaryExpr(s.input, 2, [&] { return u(rng); });
    const MatX up = MatX::NullaryExpr(s.output(), 2, [&] { return u(rng); });
    const auto r = oracle::gradient_check(s, p, x, up);
    worst = std::max(worst, r.max_rel_error);
    skips += r.kink_skips;
  }
  return {worst < 1e-4, "100 nets, max rel err " + num(worst) + ", kink skips " + std::to_string(skips)};
}

Outcome reward_oracle() {
  using namespace reward;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ang(-2 * M_PI, 2 * M_PI), pos(0, 5);
  const auto point = [&] { return Vec3(u(rng), u(rng), u(rng)); };
  const RewardWeights w;
  const RewardScales s;
  const oracle::Scales os;
  const env::Workspace ws;
  double worst = 0.0;
  const auto note = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (int k = 0; k < 1000; ++k) {
    const Vec3 pe = point(), po = point(), pg = point();
    const double psi = ang(rng), theta = ang(rng);
    note(approach_reward<double>(pe, po, psi, theta, w, s), oracle::r_e(arr(pe), arr(po), psi, theta, {}, {}));
    note(interaction_reward<double>(po, pg, true, w, s), oracle::r_i(arr(po), arr(pg), true, {}, {}));
    note(interaction_reward<double>(po, pg, false, w, s), oracle::r_i(arr(po), arr(pg), false, {}, {}));
    const Vec3 v = 0.1 * point(), dir = point().normalized();
    note(alignment_reward<double>(v, dir, w, s), oracle::r_a(arr(v), arr(dir), {}, {}));
    const env::EventSet none{};
    note(collision_penalty(CollisionKind::GroundOrSelf), 3.0);
    note(collision_penalty(CollisionKind::Object), 1.5);
    note(collision_penalty(collision_kind(none)), 0.0);
    const int step = static_cast<int>(pos(rng) * 40);
    note(step_limit_penalty(step, 100), step >= 100 ? 2.0 : 0.0);
    note(ee_inclination_penalty(psi, theta, w.w6), oracle::c_e(psi, theta, w.w6));
    std::array<double, 7> a{}, b{}, c{};
    ActionVec va, vb, vc;
    for (int i = 0; i < 7; ++i) {
      va(i) = a[i] = u(rng);
      vb(i) = b[i] = u(rng);
      vc(i) = c[i] = u(rng);
    }
    note(action_smoothness_penalty(va, vb, vc, w.w7), oracle::c_a(a, b, c, w.w7));
    note(object_inclination_penalty(psi / 2, theta / 2, s), oracle::c_o(psi / 2, theta / 2, os));
    note(workspace_penalty(po, pe, ws, s.sigma1),
         oracle::c_w(arr(po), arr(pe), ws.x_min, ws.x_max, ws.y_min, ws.y_max, s.sigma1));
    std::array<double, 9> t{};
    for (double& x : t) x = pos(rng);
    note(total_reward(RewardBreakdown{t[0], t[1], t[2], t[3], t[4], t[5], t[6], t[7], t[8], 0.0}),
         oracle::total(t));
  }
  // Edge cases that must be exact.
  bool edges = true;
  const Vec3 p(0.4, 0.1, 0.05);
  edges = edges && approach_reward<double>(p, p, M_PI, 0.0, w, s) == w.w0 + w.w1 + w.w2;
  edges = edges && interaction_reward<double>(p, p, true, w, s) == w.w3 + w.w4;
  edges = edges && interaction_reward<double>(p, p, false, w, s) == 0.0;
  edges = edges && alignment_reward<double>(Vec3(0, 0, 0), Vec3(1, 0, 0), w, s) == 0.0;
  edges = edges && alignment_reward<double>(Vec3(-1, 0, 0), Vec3(1, 0, 0), w, s) == 0.0;
  edges = edges && alignment_reward<double>(Vec3(1, 0, 0), Vec3(1, 0, 0), w, s) == 3.0 * w.w5;
  const Vec3 corner(ws.x_max, ws.y_min, 0.2), inside(0.4, 0.0, 0.1);
  edges = edges && workspace_penalty(corner, inside, ws, s.sigma1) == 0.0;
  edges = edges && workspace_penalty(inside, inside, ws, s.sigma1) == 0.0;
  edges = edges && step_limit_penalty(99, 100) == 0.0 && step_limit_penalty(100, 100) == 2.0;
  return {worst <= 1e-12 && edges, "9 terms + total x 1000, max abs err " + num(worst) +
                                       (edges ? ", edge cases exact" : ", edge case mismatch")};
}

Outcome td3_mechanics() {
  td3::Td3Config c;
  c.hidden = {32, 32};
  c.batch_size = 64;
  td3::Td3Agent<double> agent(kStateDim, kActionDim, c, 7);
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto batch = [&](int n) {
    agentio::Batch<double> b;
    b.states = MatX::NullaryExpr(kStateDim, n, [&] { return u(rng); });
    b.next_states = MatX::NullaryExpr(kStateDim, n, [&] { return u(rng); });
    b.actions = MatX::NullaryExpr(kActionDim, n, [&] { return u(rng); });
    b.rewards = VecX::NullaryExpr(n, [&] { return u(rng); });
    b.dones = VecX::NullaryExpr(n, [&] { return u(rng) > 0.8 ? 1.0 : 0.0; });
    return b;
  };
  long violations = 0;
  bool ratio_ok = true;
  for (int k = 1; k <= 1000; ++k) {
    const auto b = batch(64);
    const auto t = agent.compute_target(b, rng);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      const double nd = 1.0 - b.dones(i);
      const double y1 = b.rewards(i) + c.gamma * nd * t.q1(i);
      const double y2 = b.rewards(i) + c.gamma * nd * t.q2(i);
      if (t.y(i) > y1 + 1e-12 || t.y(i) > y2 + 1e-12) ++violations;
    }
    agent.critic_update(b, t.y);
    if (k % c.policy_delay == 0) agent.actor_update(b);
    ratio_ok = ratio_ok && agent.actor_updates() == agent.critic_updates() / c.policy_delay;
  }
  const bool exact_ratio = ratio_ok && agent.actor_updates() * 2 == agent.critic_updates();

  std::mt19937_64 prng(5);
  const auto spec = td3::critic_spec(kStateDim, kActionDim, {16});
  const auto src = neural::init_params<double>(spec, prng);
  const auto tgt = neural::init_params<double>(spec, prng);
  auto t0 = tgt, t1 = tgt;
  neural::soft_update(t0, src, 0.0);
  neural::soft_update(t1, src, 1.0);
  const bool endpoints = t0 == tgt && t1 == src;
  return {violations == 0 && exact_ratio && endpoints,
          "1000 batches, violations " + std::to_string(violations) + ", actor/critic " +
              std::to_string(agent.actor_updates()) + "/" + std::to_string(agent.critic_updates()) +
              (endpoints ? ", soft-update endpoints exact" : ", soft-update endpoints differ")};
}

// Trains with the default desk-scale config and evaluates the final policy
// on the held-out test seeds.
struct TrainedRun {
  double success = 0.0;
  double seconds = 0.0;
  int episodes = 0;
};

TrainedRun train_task(env::Task task, double tol_cm, int episodes, std::uint64_t seed, const fs::path& dir,
                      int eval_every) {
  evalcli::RunConfig c = evalcli::default_run_config();
  c.seed = seed;
  c.env.task = task;
  c.env.success_tolerance = tol_cm / 100.0;
  c.train.episodes = episodes;
  c.train.eval_every = eval_every;
  c.train.eval_episodes = 100;
  c.eval.episodes = 100;
  c.eval.thresholds_cm = {tol_cm};
  c.out_dir = dir.string();
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = evalcli::run_train(c, log);
  TrainedRun r;
  r.seconds = seconds_since(t0);
  r.episodes = s.episodes_run;
  r.success = s.final_eval.at(0).success_rate;
  return r;
}

Outcome reach_analog(const fs::path& work) {
  int passed = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const TrainedRun r = train_task(env::Task::Reach, 2.0, 10000, seed, work / "reach", 500);
    const bool ok = r.success >= 0.9 && r.episodes <= 10000 && r.seconds <= 1800.0;
    passed += ok ? 1 : 0;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + " " +
              num(100 * r.success, 3) + "% in " + num(r.seconds, 3) + " s";
  }
  return {passed >= 2, std::to_string(passed) + "/3 seeds pass (" + detail + ")"};
}

Outcome pick_analog(const fs::path& work) {
  const TrainedRun r = train_task(env::Task::Pick, 3.0, 20000, 1, work / "pick", 1000);
  return {r.success >= 0.7 && r.episodes <= 20000,
          "seed 1 " + num(100 * r.success, 3) + "% at 3 cm in " + num(r.seconds, 3) + " s"};
}

Outcome vision_suite() {
  using namespace vision;
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> px(0, 255), dim(3, 32);
  bool lap = true;
  for (int k = 0; k < 100; ++k) {
    const ImageD img = ImageD::NullaryExpr(dim(rng), dim(rng), [&] { return double(px(rng)); });
    lap = lap && (laplacian_response(img) == oracle::laplacian_loop(img)).all();
  }
  int blur_ok = 0;
  std::uniform_int_distribution<int> size(8, 40), cell(1, 4), radius(1, 3);
  for (int k = 0; k < 50; ++k) {
    const int n = size(rng);
    const ImageD sharp = checkerboard(n, n + 5, cell(rng));
    blur_ok += blur_score(sharp) < blur_score(box_blur(sharp, radius(rng))) ? 1 : 0;
  }
  int key_ok = 0;
  std::uniform_int_distribution<int> len(6, 20), bg(0, 120);
  for (int k = 0; k < 20; ++k) {
    const int n = len(rng);
    std::vector<std::size_t> jumps;
    std::bernoulli_distribution jump(0.3);
    FrameSeq seq;
    int col = 4;
    const double base = bg(rng);
    for (int i = 0; i < n; ++i) {
      if (i > 0 && jump(rng)) {
        col = col == 4 ? 40 : 4;
        jumps.push_back(i);
      }
      Frame f{ImageD::Constant(64, 64, base + (i % 3)), std::nullopt};
      f.gray.block(24, col, 12, 12).setConstant(255.0);
      seq.frames.push_back(std::move(f));
    }
    key_ok += extract_keyframes(seq) == jumps ? 1 : 0;
  }
  const bool iou = overlap(BBox{0, 0, 2, 2}, BBox{0, 0, 2, 2}) == 1.0 &&
                   overlap(BBox{0, 0, 2, 2}, BBox{3, 3, 4, 4}) == 0.0 &&
                   overlap(BBox{0, 0, 2, 2}, BBox{1, 0, 3, 2}) == 1.0 / 3.0;
  return {lap && blur_ok == 50 && key_ok == 20 && iou,
          std::string("laplacian ") + (lap ? "exact" : "MISMATCH") + ", blur " + std::to_string(blur_ok) +
              "/50, keyframes " + std::to_string(key_ok) + "/20, IoU " + (iou ? "exact" : "MISMATCH")};
}

Outcome command_suite(const fs::path& fixtures) {
  int exact = 0;
  std::string detail;
  bool padded = true;
  for (const char* name : {"pick_brown_box", "touch_white_trapezoid", "put_green_block"}) {
    const fs::path dir = fixtures / "command" / name;
    const auto video = nlohmann::json::parse(slurp(dir / "video.json"));
    vision::SyntheticVideoSpec spec;
    spec.frames = video.at("frames");
    spec.height = video.at("height");
    spec.width = video.at("width");
    spec.fps = video.at("fps");
    const auto dets = vision::read_detections_jsonl(slurp(dir / "detections.jsonl"));
    const command::MockBackend backend(nlohmann::json::parse(slurp(dir / "mock.json")));
    const auto r = command::video_to_command(vision::render_detections(dets, spec), dets, backend);
    std::string expected = slurp(dir / "expected.txt");
    while (!expected.empty() && expected.back() == '\n') expected.pop_back();
    exact += r.text == expected ? 1 : 0;
    padded = padded && r.command.tokens.size() == 8;
    detail += (detail.empty() ? "\"" : ", \"") + r.text + "\"";
  }
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> n(0, 8);
  for (int k = 0; k < 1000; ++k) padded = padded && command::pad(std::vector<std::string>(n(rng), "w")).size() == 8;
  return {exact == 3 && padded, std::to_string(exact) + "/3 exact: " + detail + (padded ? ", 8 tokens" : "")};
}

Outcome bleu_suite() {
  using evalcli::tokenize;
  const std::vector<evalcli::Tokens> corpus{tokenize("Pick the brown box up"), tokenize("Touch the white trapezoid"),
                                            tokenize("Put the green block into yellow bowl")};
  const auto same = evalcli::bleu(corpus, corpus);
  bool identical = true;
  for (double b : same.bleu) identical = identical && b == 1.0;
  // Hand-counted: unigrams 4/5, bigrams 2/4, trigrams 0/3.
  const auto r = evalcli::bleu({tokenize("pick the red box up")}, {tokenize("pick the blue box up")});
  const bool counted = std::abs(r.bleu[0] - 0.8) < 1e-6 && std::abs(r.bleu[1] - std::sqrt(0.4)) < 1e-6 &&
                       r.bleu[2] == 0.0 && r.bleu[3] == 0.0;
  // Two pairs: unigrams 8/9, bigrams 5/7, trigrams 2/5, 4-grams 0/3.
  const auto r2 = evalcli::bleu({tokenize("put the red block into bowl"), tokenize("touch the box")},
                                {tokenize("put the green block into bowl"), tokenize("touch the box")});
  const bool counted2 = std::abs(r2.bleu[0] - 8.0 / 9.0) < 1e-6 &&
                        std::abs(r2.bleu[1] - std::sqrt(8.0 / 9.0 * 5.0 / 7.0)) < 1e-6 &&
                        std::abs(r2.bleu[2] - std::cbrt(8.0 / 9.0 * 5.0 / 7.0 * 2.0 / 5.0)) < 1e-6 &&
                        r2.bleu[3] == 0.0;
  const auto d = evalcli::bleu({tokenize("alpha beta gamma")}, {tokenize("one two three")});
  bool disjoint = true;
  for (double b : d.bleu) disjoint = disjoint && b == 0.0;
  return {identical && counted && counted2 && disjoint,
          std::string("identical ") + (identical ? "1.0" : "!= 1") + ", hand-counted " +
              (counted && counted2 ? "match" : "MISMATCH") + ", disjoint " + (disjoint ? "0" : "!= 0")};
}

Outcome reproducibility(const fs::path& work) {
  evalcli::RunConfig c = evalcli::default_run_config();
  c.seed = 11;
  c.train.episodes = 60;
  c.train.eval_every = 20;
  c.train.eval_episodes = 5;
  c.train.checkpoint_every = 30;
  c.eval.episodes = 5;
  c.td3.warmup = 200;
  std::ostringstream log;
  c.out_dir = (work / "repro_a").string();
  const auto a = evalcli::run_train(c, log);
  c.out_dir = (work / "repro_b").string();
  const auto b = evalcli::run_train(c, log);
  int same = 0, total = 0;
  for (const char* f : {"metrics.jsonl", "checkpoints/checkpoint_30.ckpt", "checkpoints/checkpoint_60.ckpt",
                        "checkpoints/final.ckpt", "checkpoints/best.ckpt"}) {
    ++total;
    const std::string x = slurp(a.run_dir / f);
    same += !x.empty() && x == slurp(b.run_dir / f) ? 1 : 0;
  }
  return {same == total, std::to_string(same) + "/" + std::to_string(total) + " files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work_dir = "acceptance_runs";
  std::string fixtures = H2R_FIXTURE_DIR;
  app.add_option("--work-dir", work_dir, "Scratch directory for training runs");
  app.add_option("--fixtures", fixtures, "Fixture directory");
  CLI11_PARSE(app, argc, argv);
  const fs::path work(work_dir);
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"welford-oracle", welford_oracle},
      {"gradient-oracle", gradient_oracle},
      {"reward-oracle", reward_oracle},
      {"td3-mechanics", td3_mechanics},
      {"reach-analog", [&] { return reach_analog(work); }},
      {"pick-analog", [&] { return pick_analog(work); }},
      {"vision-suite", vision_suite},
      {"command-suite", [&] { return command_suite(fixtures); }},
      {"bleu", bleu_suite},
      {"reproducibility", [&] { return reproducibility(work); }},
  };
  int failed = 0;
  // Also kept on disk: ctest hides the output of passing tests.
  std::ofstream report(work / "report.txt");
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::ostringstream line;
    line << (o.pass ? "PASS " : "FAIL ") << std::left << std::setw(18) << name << o.detail;
    std::cout << line.str() << std::endl;
    report << line.str() << std::endl;
  }
  const std::string summary = failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail";
  std::cout << summary << std::endl;
  report << summary << std::endl;
  return failed == 0 ? 0 : 1;
}
