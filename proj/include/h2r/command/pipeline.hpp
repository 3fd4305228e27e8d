#pragma once

#include <vector>

#include <json.hpp>

#include "h2r/command/backend.hpp"
#include "h2r/vision/boxes.hpp"
#include "h2r/vision/selection.hpp"
#include "h2r/vision/sharpness.hpp"

namespace h2r::command {

struct PipelineConfig {
  double keep_ratio = 0.5;
  vision::KeyframeConfig keyframes;
  vision::TrackerConfig tracker;
  vision::ClassifierConfig classifier;
  std::string hand_label = "hand";
  std::string prompt = kObjectPrompt;

  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& c);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

struct PipelineResult {
  CommandSentence command;
  std::string text;
  ActionDistribution actions;
  std::vector<std::size_t> keyframes;  // indices into the input sequence
  vision::SelectionResult selection;
  bool fallback_target = false;
};

nlohmann::json to_json(const PipelineResult& r);

// downsample -> keyframes -> track -> select -> recognize -> fuse -> render.
// Detections labelled hand_label form the hand track; all others are objects.
// With no pickable track the least-occluded object becomes the target.
PipelineResult video_to_command(const vision::FrameSeq& frames,
                                const std::vector<vision::Detection>& detections,
                                const RecognizerBackend& backend, const PipelineConfig& config = {});

}  // namespace h2r::command
