#include "h2r/evalcli/run.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "h2r/agentio/welford.hpp"
#include "h2r/command/pipeline.hpp"
#include "h2r/td3/scripted.hpp"
#include "h2r/vision/synthetic.hpp"

namespace h2r::evalcli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Policy>
std::vector<td3::EvalResult> sweep(const Policy& policy, const td3::EvalSetup& setup, int episodes,
                                   const std::vector<double>& thresholds_cm) {
  std::vector<double> tol;
  for (double cm : thresholds_cm) tol.push_back(cm / 100.0);
  return td3::threshold_sweep(policy, setup, episodes, tol);
}

SuccessTable table_from(const std::string& action, const std::vector<td3::EvalResult>& results,
                        const std::vector<double>& thresholds_cm) {
  std::vector<EvalRun> runs;
  for (std::size_t i = 0; i < results.size(); ++i) runs.push_back({action, thresholds_cm[i], results[i].successes});
  return success_table(runs);
}

template <typename Scalar>
TrainSummary train_with(const RunConfig& c, const fs::path& dir, std::ostream& log) {
  td3::Trainer<Scalar> trainer(make_train_config(c, dir));
  td3::TrainCallbacks cb;
  const auto t0 = std::chrono::steady_clock::now();
  double window_success = 0.0;
  int window = 0;
  cb.on_episode = [&](const td3::EpisodeRecord& r) {
    window_success += r.success ? 1.0 : 0.0;
    if (++window == 100) {
      std::ostringstream line;
      line << "episode " << r.episode << "  steps " << r.total_steps << "  success(100) "
           << window_success / 100.0 << "  t " << std::fixed << std::setprecision(1) << seconds_since(t0) << "s\n";
      log << line.str();
      window = 0;
      window_success = 0.0;
    }
  };
  cb.on_eval = [&](const td3::EvalRecord& e) {
    log << "eval @" << e.episode << "  success " << e.result.success_rate << "  return "
        << e.result.mean_return << '\n';
  };
  const auto res = trainer.run(cb);

  TrainSummary s;
  s.run_dir = dir;
  s.episodes_run = res.episodes_run;
  s.total_steps = res.total_steps;
  s.stopped_early = res.stopped_early;
  const bool use_best = c.train.keep_best && res.best_episode > 0;
  s.evaluated_episode = use_best ? res.best_episode : res.episodes_run;
  if (use_best)
    log << "final evaluation uses the policy from episode " << res.best_episode << " (validation success "
        << res.best_success_rate << ")\n";
  s.final_eval = sweep(use_best ? trainer.best_policy() : trainer.policy(), trainer.eval_setup(td3::kTestSeedBase), c.eval.episodes, c.eval.thresholds_cm);
  s.table = table_from(env::to_string(c.env.task), s.final_eval, c.eval.thresholds_cm);
  return s;
}

template <typename Scalar>
EvalSummary eval_with(const json& ckpt, const RunConfig& c, int episodes,
                      const std::vector<double>& thresholds_cm, std::uint64_t seed, const fs::path& trace) {
  const auto loaded = td3::load_checkpoint<Scalar>(ckpt);
  td3::EvalSetup setup{c.env, c.weights, c.scales, c.td3.gamma, seed, {}};
  EvalSummary s;
  if (!trace.empty()) {
    if (trace.has_parent_path()) fs::create_directories(trace.parent_path());
    std::ofstream out(trace);
    if (!out) throw PipelineError("cannot write " + trace.string());
    td3::EvalSetup traced = setup;
    traced.trace = [&out](const json& j) { out << j.dump() << '\n'; };
    s.results.push_back(td3::evaluate(loaded.policy(), traced, episodes, thresholds_cm.front() / 100.0));
    std::vector<double> rest(thresholds_cm.begin() + 1, thresholds_cm.end());
    for (auto& r : sweep(loaded.policy(), setup, episodes, rest)) s.results.push_back(std::move(r));
  } else {
    s.results = sweep(loaded.policy(), setup, episodes, thresholds_cm);
  }
  s.table = table_from(env::to_string(c.env.task), s.results, thresholds_cm);
  return s;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path.string());
  out << text;
}

json experiment_snapshot(const RunConfig& c) {
  json j = to_json(c);
  j.erase("out_dir");
  return j;
}

td3::TrainConfig make_train_config(const RunConfig& c, const fs::path& run_dir) {
  td3::TrainConfig t;
  t.env = c.env;
  t.weights = c.weights;
  t.scales = c.scales;
  t.td3 = c.td3;
  t.episodes = c.train.episodes;
  t.seed = c.seed;
  t.observation_noise = c.train.observation_noise;
  t.noise = c.train.noise;
  t.eval_every = c.train.eval_every;
  t.eval_episodes = c.train.eval_episodes;
  t.stop_success_rate = c.train.stop_success_rate;
  t.keep_best = c.train.keep_best;
  t.checkpoint_every = c.train.checkpoint_every;
  t.out_dir = run_dir.string();
  t.metadata = experiment_snapshot(c);
  return t;
}

fs::path prepare_run_dir(const RunConfig& c, const std::string& verb) {
  const json snap = experiment_snapshot(c);
  const std::string id = run_id(json{{"verb", verb}, {"config", snap}});
  const fs::path dir = fs::path(c.out_dir) / (verb + "-" + id);
  fs::create_directories(dir);
  write_text(dir / "config.json", snap.dump(2) + "\n");
  write_text(dir / "run.json",
             json{{"run_id", id}, {"verb", verb}, {"seed", c.seed}, {"precision", c.precision}}.dump(2) + "\n");
  return dir;
}

TrainSummary run_train(const RunConfig& c, std::ostream& log) {
  c.validate();
  const fs::path dir = prepare_run_dir(c, "train");
  log << "run directory " << dir.string() << '\n';
  TrainSummary s = c.precision == "float64" ? train_with<double>(c, dir, log) : train_with<float>(c, dir, log);
  json evals = json::array();
  for (const auto& r : s.final_eval) evals.push_back(td3::to_json(r));
  write_text(dir / "final_eval.json", evals.dump(2) + "\n");
  write_text(dir / "success_table.csv", s.table.to_csv());
  write_text(dir / "success_table.txt", s.table.to_text());
  return s;
}

EvalSummary run_eval(const fs::path& checkpoint, int episodes, const std::vector<double>& thresholds_cm,
                     std::uint64_t seed, const fs::path& trace) {
  if (thresholds_cm.empty()) throw ConfigError("needs at least one threshold", "/eval/thresholds_cm");
  json ckpt;
  try {
    ckpt = json::parse(read_text(checkpoint));
  } catch (const json::parse_error& e) {
    throw ConfigError(checkpoint.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = run_config_from_json(ckpt.value("metadata", json::object()));
  const std::string scalar = ckpt.value("scalar", std::string("float32"));
  return scalar == "float64" ? eval_with<double>(ckpt, c, episodes, thresholds_cm, seed, trace)
                             : eval_with<float>(ckpt, c, episodes, thresholds_cm, seed, trace);
}

vision::FrameSeq load_frames(const fs::path& path) {
  if (fs::is_directory(path)) return vision::read_frame_dir(path);
  return vision::read_raw(read_text(path));
}

std::unique_ptr<command::RecognizerBackend> make_backend(const CommandSection& c) {
  if (c.backend == "mock") {
    if (c.fixture.empty()) throw ConfigError("mock backend needs a fixture file", "/command/fixture");
    json fixture;
    try {
      fixture = json::parse(read_text(c.fixture));
    } catch (const json::parse_error& e) {
      throw ConfigError(c.fixture + ": " + e.what(), "/command/fixture");
    }
    return std::make_unique<command::MockBackend>(std::move(fixture));
  }
  command::RemoteConfig rc;
  rc.endpoint = c.endpoint;
  rc.attempts = c.attempts;
  rc.read_timeout = std::chrono::milliseconds(c.timeout_ms);
  return std::make_unique<command::RemoteBackend>(rc);
}

command::PipelineResult run_video2cmd(const fs::path& frames, const fs::path& detections,
                                      const command::RecognizerBackend& backend,
                                      const command::PipelineConfig& config) {
  const auto seq = load_frames(frames);
  const auto dets = vision::read_detections_jsonl(read_text(detections));
  return command::video_to_command(seq, dets, backend, config);
}

std::vector<BenchItem> run_bench(const std::string& suite, const fs::path& work_dir, std::ostream& log) {
  if (suite != "smoke") throw ConfigError("unknown bench suite '" + suite + "'", "/bench/suite");
  fs::create_directories(work_dir);
  std::vector<BenchItem> items;
  const auto timed = [&](const std::string& name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    BenchItem item;
    item.name = name;
    try {
      fn(item);
    } catch (const std::exception& e) {
      item.ok = false;
      item.detail["error"] = e.what();
    }
    item.seconds = seconds_since(t0);
    std::ostringstream line;
    line << (item.ok ? "ok   " : "FAIL ") << std::left << std::setw(16) << name << std::right << std::fixed
         << std::setprecision(3) << item.seconds << "s  " << item.detail.dump() << '\n';
    log << line.str();
    items.push_back(std::move(item));
  };

  timed("welford", [](BenchItem& it) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    agentio::Welford<double> w(kStateDim);
    Eigen::VectorXd x(kStateDim);
    for (int i = 0; i < 100000; ++i) {
      for (int k = 0; k < kStateDim; ++k) x(k) = 3.0 * n(rng) + k;
      w.update(x);
    }
    it.ok = w.count() == 100000;
    it.detail = {{"samples", w.count()}};
  });

  timed("scripted_reach", [](BenchItem& it) {
    auto ec = env::simplified_3dof_config();
    const auto r = td3::evaluate(td3::ScriptedPolicy(ec), td3::EvalSetup{ec, {}, {}, 0.99, 1, {}}, 20, 0.02);
    it.ok = r.success_rate >= 0.9;
    it.detail = {{"success_rate", r.success_rate}};
  });

  timed("scripted_pick", [](BenchItem& it) {
    auto ec = env::simplified_3dof_config();
    ec.task = env::Task::Pick;
    const auto r = td3::evaluate(td3::ScriptedPolicy(ec), td3::EvalSetup{ec, {}, {}, 0.99, 1, {}}, 20, 0.03);
    it.ok = r.success_rate >= 0.9;
    it.detail = {{"success_rate", r.success_rate}};
  });

  timed("td3_train", [&](BenchItem& it) {
    RunConfig c = default_run_config();
    c.td3.hidden = {32, 32};
    c.td3.batch_size = 64;
    c.td3.warmup = 200;
    c.train.episodes = 20;
    c.train.eval_every = 10;
    c.train.eval_episodes = 5;
    const auto t0 = std::chrono::steady_clock::now();
    td3::Trainer<float> trainer(make_train_config(c, work_dir / "td3"));
    const auto res = trainer.run();
    const double sec = seconds_since(t0);
    it.ok = res.episodes_run == 20 && fs::exists(work_dir / "td3" / "checkpoints" / "final.ckpt");
    it.detail = {{"steps", res.total_steps}, {"steps_per_second", res.total_steps / std::max(sec, 1e-9)}};
  });

  timed("video2cmd", [&](BenchItem& it) {
    std::vector<vision::Detection> dets;
    for (int f = 0; f < 24; ++f) {
      dets.push_back({f, {80, 60, 104, 76}, "bowl"});
      const double x = f < 4 ? 16.0 : (f < 20 ? 16.0 + 4.0 * (f - 3) : 80.0);
      dets.push_back({f, {x, 48, x + 12, 60}, "block"});
    }
    vision::SyntheticVideoSpec spec;
    spec.frames = 24;
    const auto seq = vision::render_detections(dets, spec);
    const fs::path frames = work_dir / "frames";
    fs::create_directories(frames);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      std::ostringstream name;
      name << "frame_" << std::setw(4) << std::setfill('0') << i << ".pgm";
      write_text(frames / name.str(), vision::write_pnm(seq.frames[i]));
    }
    write_text(work_dir / "detections.jsonl", vision::write_detections_jsonl(dets));
    command::MockBackend backend(json{{"action", {{"put", 0.9}, {"pick", 0.1}}},
                                      {"objects", {{"block", "green block"}, {"bowl", "yellow bowl"}}}});
    const auto r = run_video2cmd(frames, work_dir / "detections.jsonl", backend, {});
    it.ok = r.text == "Put the green block into yellow bowl";
    it.detail = {{"text", r.text}, {"keyframes", r.keyframes.size()}};
  });

  timed("bleu", [](BenchItem& it) {
    const std::vector<Tokens> c{tokenize("Pick the brown box up"), tokenize("Touch the white trapezoid")};
    const auto r = bleu(c, c);
    it.ok = r.bleu[3] == 1.0;
    it.detail = {{"bleu4", r.bleu[3]}};
  });

  json out = json::array();
  for (const auto& i : items)
    out.push_back({{"name", i.name}, {"ok", i.ok}, {"seconds", i.seconds}, {"detail", i.detail}});
  write_text(work_dir / "bench.json", out.dump(2) + "\n");
  return items;
}

std::string plot_curves_svg(const std::string& curves_csv, int window) {
  if (window < 1) throw ConfigError("window must be >= 1", "/plot/window");
  std::istringstream in(curves_csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("episode,return", 0) != 0)
    throw ProtocolError("curves.csv: unexpected header");
  std::vector<double> ep, ret, succ;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 5) throw ProtocolError("curves.csv line " + std::to_string(lineno) + ": too few columns");
    ep.push_back(std::stod(cells[0]));
    ret.push_back(std::stod(cells[1]));
    succ.push_back(std::stod(cells[4]));
  }
  if (ep.empty()) throw ProtocolError("curves.csv has no rows");

  const auto smooth = [&](const std::vector<double>& v) {
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum += v[i];
      if (i >= static_cast<std::size_t>(window)) sum -= v[i - window];
      out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
    }
    return out;
  };
  const auto r = smooth(ret), s = smooth(succ);
  const double w = 640, h = 240, pad = 40;
  const double x0 = ep.front(), x1 = std::max(ep.back(), ep.front() + 1.0);
  double rmin = *std::min_element(r.begin(), r.end()), rmax = *std::max_element(r.begin(), r.end());
  if (rmax - rmin < 1e-12) rmax = rmin + 1.0;

  const auto poly = [&](const std::vector<double>& v, double lo, double hi, const char* color) {
    std::ostringstream p;
    p << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x = pad + (ep[i] - x0) / (x1 - x0) * (w - 2 * pad);
      const double y = h - pad - (v[i] - lo) / (hi - lo) * (h - 2 * pad);
      p << std::fixed << std::setprecision(1) << x << ',' << y << ' ';
    }
    p << "\"/>\n";
    return p.str();
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n"
      << poly(r, rmin, rmax, "steelblue") << poly(s, 0.0, 1.0, "darkorange")
      << "<text x=\"" << pad << "\" y=\"20\" font-size=\"12\">return (blue, " << rmin << " to " << rmax
      << "), success rate (orange, 0 to 1), window " << window << "</text>\n"
      << "<text x=\"" << w - pad << "\" y=\"" << h - 10 << "\" font-size=\"12\" text-anchor=\"end\">episode "
      << x1 << "</text>\n"
      << "</svg>\n";
  return svg.str();
}

}  // namespace h2r::evalcli
