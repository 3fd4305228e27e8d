#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2r/command/backend.hpp"
#include "h2r/evalcli/config.hpp"
#include "h2r/evalcli/metrics.hpp"
#include "h2r/td3/trainer.hpp"
#include "h2r/vision/io.hpp"

namespace h2r::evalcli {

// Exit codes of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Config as stored in checkpoints and hashed into the run id: everything
// except the output location, so the same experiment written elsewhere
// produces identical files.
nlohmann::json experiment_snapshot(const RunConfig& c);

td3::TrainConfig make_train_config(const RunConfig& c, const std::filesystem::path& run_dir);

// <out_dir>/<verb>-<run id>, with config.json and run.json written.
std::filesystem::path prepare_run_dir(const RunConfig& c, const std::string& verb);

struct TrainSummary {
  std::filesystem::path run_dir;
  int episodes_run = 0;
  std::int64_t total_steps = 0;
  bool stopped_early = false;
  int evaluated_episode = 0;  // episode whose policy the final evaluation used
  std::vector<td3::EvalResult> final_eval;  // one per threshold
  SuccessTable table;
};

// Trains, then evaluates the best validated policy (or the final one when
// train.keep_best is off or no validation ran) at every configured threshold and
// writes success_table.csv / success_table.txt next to the metrics.
TrainSummary run_train(const RunConfig& c, std::ostream& log);

struct EvalSummary {
  std::vector<td3::EvalResult> results;
  SuccessTable table;
};

// Evaluates a checkpoint with the env/reward settings recorded inside it.
// With `trace` set, the rollouts at the first threshold are written there as
// JSONL, one line per step.
EvalSummary run_eval(const std::filesystem::path& checkpoint, int episodes,
                     const std::vector<double>& thresholds_cm, std::uint64_t seed,
                     const std::filesystem::path& trace = {});

// Frames from a directory of PGM/PPM files or a raw tensor container file.
vision::FrameSeq load_frames(const std::filesystem::path& path);
std::unique_ptr<command::RecognizerBackend> make_backend(const CommandSection& c);

command::PipelineResult run_video2cmd(const std::filesystem::path& frames,
                                      const std::filesystem::path& detections,
                                      const command::RecognizerBackend& backend,
                                      const command::PipelineConfig& config);

struct BenchItem {
  std::string name;
  double seconds = 0.0;
  bool ok = false;
  nlohmann::json detail;
};

// "smoke": small end-to-end exercise of every module.
std::vector<BenchItem> run_bench(const std::string& suite, const std::filesystem::path& work_dir,
                                 std::ostream& log);

// Learning-curve SVG from curves.csv: moving-average return and success.
std::string plot_curves_svg(const std::string& curves_csv, int window = 50);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace h2r::evalcli
