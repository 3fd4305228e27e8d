#include "h2r/command/pipeline.hpp"

#include <algorithm>
#include <map>

#include "h2r/common/errors.hpp"

namespace h2r::command {

void PipelineConfig::validate() const {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) throw ConfigError("must be in (0, 1]", "/command/keep_ratio");
  if (!(keyframes.pixel_thresh >= 0.0)) throw ConfigError("must be >= 0", "/vision/pixel_thresh");
  if (!(keyframes.frac_thresh >= 0.0 && keyframes.frac_thresh <= 1.0))
    throw ConfigError("must be in [0, 1]", "/vision/frac_thresh");
  if (!(tracker.iou_threshold > 0.0 && tracker.iou_threshold <= 1.0))
    throw ConfigError("must be in (0, 1]", "/vision/iou_threshold");
  if (tracker.min_samples < 1) throw ConfigError("must be >= 1", "/vision/min_track_samples");
  if (!(classifier.disp_thresh > 0.0)) throw ConfigError("must be > 0", "/vision/disp_thresh");
  if (!(classifier.var_thresh > 0.0)) throw ConfigError("must be > 0", "/vision/var_thresh");
}

nlohmann::json to_json(const PipelineConfig& c) {
  return {{"keep_ratio", c.keep_ratio},
          {"pixel_thresh", c.keyframes.pixel_thresh},
          {"frac_thresh", c.keyframes.frac_thresh},
          {"iou_threshold", c.tracker.iou_threshold},
          {"min_track_samples", c.tracker.min_samples},
          {"disp_thresh", c.classifier.disp_thresh},
          {"var_thresh", c.classifier.var_thresh},
          {"hand_label", c.hand_label},
          {"prompt", c.prompt}};
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.keep_ratio = j.value("keep_ratio", c.keep_ratio);
  c.keyframes.pixel_thresh = j.value("pixel_thresh", c.keyframes.pixel_thresh);
  c.keyframes.frac_thresh = j.value("frac_thresh", c.keyframes.frac_thresh);
  c.tracker.iou_threshold = j.value("iou_threshold", c.tracker.iou_threshold);
  c.tracker.min_samples = j.value("min_track_samples", c.tracker.min_samples);
  c.classifier.min_samples = c.tracker.min_samples;
  c.classifier.disp_thresh = j.value("disp_thresh", c.classifier.disp_thresh);
  c.classifier.var_thresh = j.value("var_thresh", c.classifier.var_thresh);
  c.hand_label = j.value("hand_label", c.hand_label);
  c.prompt = j.value("prompt", c.prompt);
  c.validate();
  return c;
}

nlohmann::json to_json(const PipelineResult& r) {
  return {{"command", to_json(r.command)},
          {"text", r.text},
          {"actions", to_json(r.actions)},
          {"keyframes", r.keyframes},
          {"selection", vision::to_json(r.selection)},
          {"fallback_target", r.fallback_target}};
}

PipelineResult video_to_command(const vision::FrameSeq& frames,
                                const std::vector<vision::Detection>& detections,
                                const RecognizerBackend& backend, const PipelineConfig& config) {
  config.validate();
  if (frames.size() < 2)
    throw PipelineError("need at least 2 frames, got " + std::to_string(frames.size()));
  frames.check_uniform();

  PipelineResult out;
  const auto kept = vision::downsample_indices(frames.size(), config.keep_ratio);
  vision::FrameSeq reduced;
  reduced.fps = frames.fps * config.keep_ratio;
  for (std::size_t i : kept) reduced.frames.push_back(frames.frames[i]);
  for (std::size_t k : vision::extract_keyframes(reduced, config.keyframes))
    out.keyframes.push_back(kept[k]);

  vision::HandTrack hand;
  std::vector<vision::Detection> objects;
  std::size_t n_hand = 0;
  for (const auto& d : detections) {
    if (d.label == config.hand_label) {
      ++n_hand;
      auto it = hand.find(d.frame);
      if (it == hand.end() || d.box.area() > it->second.area()) hand[d.frame] = d.box;
    } else {
      objects.push_back(d);
    }
  }

  const auto tracks = vision::track_objects(objects, config.tracker);
  if (tracks.empty())
    throw PipelineError("no object tracks: " + std::to_string(objects.size()) + " object and " +
                        std::to_string(n_hand) + " hand detections over " +
                        std::to_string(frames.size()) + " frames, tracks need " +
                        std::to_string(config.tracker.min_samples) + " samples at IoU >= " +
                        std::to_string(config.tracker.iou_threshold));

  vision::SelectionConfig sel;
  sel.classifier = config.classifier;
  sel.candidate_frames = out.keyframes;
  out.selection = vision::select_objects(tracks, frames, hand, sel);

  const vision::Candidate* target = nullptr;
  if (!out.selection.pickable.empty()) {
    target = &out.selection.pickable.front();
  } else if (!out.selection.placeable.empty()) {
    target = &out.selection.placeable.front();
    out.fallback_target = true;
  } else {
    throw PipelineError("tracking produced " + std::to_string(tracks.size()) +
                        " tracks but none had a usable crop");
  }

  const auto recognize = [&](const vision::Candidate& c, const std::string& role) {
    const auto patch = vision::crop(frames.frames[c.frame].gray, c.box);
    return backend.recognize_object(patch, config.prompt, {c.track_id, c.label, role});
  };

  out.actions = backend.classify_action(reduced);
  const ObjectLabel target_label = recognize(*target, out.fallback_target ? "placeable" : "pickable");
  out.command = fuse(out.actions, target_label);

  if (needs_destination(out.command.action)) {
    const vision::Candidate* dest = nullptr;
    for (const auto& c : out.selection.placeable)
      if (c.track_id != target->track_id) {
        dest = &c;
        break;
      }
    if (!dest)
      throw PipelineError("action '" + out.command.action + "' needs a destination but only " +
                          std::to_string(out.selection.placeable.size()) +
                          " placeable track(s) were found");
    out.command = fuse(out.actions, target_label, recognize(*dest, "placeable"));
  }
  out.text = render(out.command);
  return out;
}

}  // namespace h2r::command
