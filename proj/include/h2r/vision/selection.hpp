#pragma once

#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "h2r/vision/boxes.hpp"
#include "h2r/vision/image.hpp"
#include "h2r/vision/sharpness.hpp"

namespace h2r::vision {

struct Candidate {
  int track_id = 0;
  std::string label;
  int frame = 0;  // frame of the best crop
  BBox box;
  double blur = 0.0;
  double hand_overlap = 0.0;
};

struct SelectionResult {
  std::vector<Candidate> pickable;   // P1, best first
  std::vector<Candidate> placeable;  // P2, best first
};

nlohmann::json to_json(const SelectionResult& r);

struct SelectionConfig {
  ClassifierConfig classifier;
  // When set, only these frames are considered for crops (e.g. keyframes).
  // A track with no sample in the set falls back to all of its samples.
  std::optional<std::vector<std::size_t>> candidate_frames;
};

// Hand boxes by frame index; frames without an entry have no visible hand.
using HandTrack = std::map<int, BBox>;

// For every track picks the crop minimizing (hand overlap, blur score), splits
// tracks into pickable and placeable, and ranks each set by the same key with
// the track id as final tie-break.
SelectionResult select_objects(const std::vector<Track>& tracks, const FrameSeq& frames,
                               const HandTrack& hand, const SelectionConfig& config = {});

}  // namespace h2r::vision
