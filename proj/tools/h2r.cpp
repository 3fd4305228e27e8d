#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "h2r/evalcli/run.hpp"

namespace fs = std::filesystem;
using namespace h2r;
using namespace h2r::evalcli;

namespace {

RunConfig config_or_default(const std::string& path) {
  if (path.empty()) {
    const auto j = apply_env_overrides(to_json(default_run_config()), process_environment());
    return run_config_from_json(j);
  }
  return load_run_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-to-robot imitation pipeline: training, evaluation and video-to-command"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int episodes = 0;

  auto* train = app.add_subcommand("train", "Train a TD3 policy");
  train->add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  std::string task;
  train->add_option("--task", task, "Override /env/task")->check(CLI::IsMember({"reach", "touch", "pick", "move", "put"}));
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--episodes", episodes, "Override /train/episodes")->check(CLI::PositiveNumber);
  train->add_option("--out", out_dir, "Override the output directory");

  std::string checkpoint;
  int eval_episodes = 100;
  std::vector<double> thresholds{1.0, 2.0, 3.0, 4.0};
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint at positional thresholds");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "Evaluation episodes")->check(CLI::PositiveNumber);
  eval->add_option("--threshold-cm", thresholds, "Success thresholds in cm")->delimiter(',');
  eval->add_option("--seed", seed, "First evaluation episode seed");
  std::string trace;
  eval->add_option("--trace", trace, "Write per-step JSONL traces of the first threshold's episodes");
  eval->add_option("--out", eval_out, "Write success_table.csv and eval.json into this directory");

  std::string frames, detections, backend = "mock", endpoint, fixture, cmd_out;
  auto* v2c = app.add_subcommand("video2cmd", "Turn a demonstration video into a command");
  v2c->add_option("--frames", frames, "Directory of PGM/PPM frames or a raw tensor file")->required();
  v2c->add_option("--detections", detections, "Detections JSONL")->required()->check(CLI::ExistingFile);
  v2c->add_option("--backend", backend, "Recognition backend")->check(CLI::IsMember({"mock", "remote"}));
  v2c->add_option("--endpoint", endpoint, "Remote backend URL");
  v2c->add_option("--fixture", fixture, "Mock backend fixture");
  v2c->add_option("--config", config_path, "Run configuration (vision and command sections)")
      ->check(CLI::ExistingFile);
  v2c->add_option("--out", cmd_out, "Write the command text here (and .json alongside)");

  std::string suite = "smoke";
  auto* bench = app.add_subcommand("bench", "Quick end-to-end checks");
  bench->add_option("--suite", suite, "Suite name")->check(CLI::IsMember({"smoke"}));
  bench->add_option("--out", out_dir, "Work directory");

  std::string curves, svg_out;
  int window = 50;
  auto* plot = app.add_subcommand("plot", "Learning-curve SVG from curves.csv");
  plot->add_option("--curves", curves, "curves.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", svg_out, "Output SVG")->required();
  plot->add_option("--window", window, "Moving-average window")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      RunConfig c = config_or_default(config_path);
      if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
      if (episodes > 0) c.train.episodes = episodes;
      if (!task.empty()) c.env.task = env::task_from_string(task);
      if (!out_dir.empty()) c.out_dir = out_dir;
      const auto s = run_train(c, std::cout);
      std::cout << "episodes " << s.episodes_run << "  steps " << s.total_steps
                << (s.stopped_early ? "  (stopped early)" : "") << '\n'
                << s.table.to_text() << "written to " << s.run_dir.string() << '\n';
    } else if (*eval) {
      const auto s = run_eval(checkpoint, eval_episodes, thresholds,
                              seed >= 0 ? static_cast<std::uint64_t>(seed) : td3::kTestSeedBase, trace);
      std::cout << s.table.to_text();
      if (!eval_out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : s.results) j.push_back(td3::to_json(r));
        write_text(fs::path(eval_out) / "eval.json", j.dump(2) + "\n");
        write_text(fs::path(eval_out) / "success_table.csv", s.table.to_csv());
      }
    } else if (*v2c) {
      RunConfig c = config_path.empty() ? default_run_config() : load_run_config(config_path);
      if (v2c->count("--backend")) c.command.backend = backend;
      if (!endpoint.empty()) c.command.endpoint = endpoint;
      if (!fixture.empty()) c.command.fixture = fixture;
      c.validate();
      const auto be = make_backend(c.command);
      const auto r = run_video2cmd(frames, detections, *be, c.vision);
      std::cout << r.text << '\n';
      if (!cmd_out.empty()) {
        write_text(cmd_out, r.text + "\n");
        write_text(cmd_out + ".json", command::to_json(r).dump(2) + "\n");
      }
    } else if (*bench) {
      const fs::path dir = out_dir.empty() ? fs::path("runs") / ("bench-" + suite) : fs::path(out_dir);
      const auto items = run_bench(suite, dir, std::cout);
      bool ok = true;
      for (const auto& i : items) ok = ok && i.ok;
      return ok ? kExitOk : kExitRuntime;
    } else if (*plot) {
      write_text(svg_out, plot_curves_svg(read_text(curves), window));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
