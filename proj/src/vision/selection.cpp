#include "h2r/vision/selection.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace h2r::vision {

namespace {

bool better(const Candidate& a, const Candidate& b) {
  return std::tie(a.hand_overlap, a.blur, a.track_id, a.frame) <
         std::tie(b.hand_overlap, b.blur, b.track_id, b.frame);
}

nlohmann::json candidate_json(const Candidate& c) {
  return {{"track", c.track_id},
          {"label", c.label},
          {"frame", c.frame},
          {"box", {c.box.x_min, c.box.y_min, c.box.x_max, c.box.y_max}},
          {"blur", c.blur},
          {"hand_overlap", c.hand_overlap}};
}

}  // namespace

nlohmann::json to_json(const SelectionResult& r) {
  nlohmann::json j = {{"pickable", nlohmann::json::array()}, {"placeable", nlohmann::json::array()}};
  for (const auto& c : r.pickable) j["pickable"].push_back(candidate_json(c));
  for (const auto& c : r.placeable) j["placeable"].push_back(candidate_json(c));
  return j;
}

SelectionResult select_objects(const std::vector<Track>& tracks, const FrameSeq& frames,
                               const HandTrack& hand, const SelectionConfig& config) {
  if (tracks.empty()) throw ShapeError("no tracks to select from");
  if (frames.size() == 0) throw ShapeError("no frames to select crops from");
  frames.check_uniform();
  const double height = static_cast<double>(frames.frames.front().height());

  std::vector<bool> allowed(frames.size(), config.candidate_frames.has_value() ? false : true);
  if (config.candidate_frames)
    for (std::size_t f : *config.candidate_frames)
      if (f < allowed.size()) allowed[f] = true;

  SelectionResult out;
  for (const auto& t : tracks) {
    bool any_allowed = false;
    for (const auto& s : t.samples) {
      if (s.frame < 0 || static_cast<std::size_t>(s.frame) >= frames.size())
        throw ShapeError("track " + std::to_string(t.id) + " refers to frame " +
                         std::to_string(s.frame) + " outside the sequence");
      any_allowed = any_allowed || allowed[s.frame];
    }
    std::optional<Candidate> best;
    for (const auto& s : t.samples) {
      if (any_allowed && !allowed[s.frame]) continue;
      Candidate c;
      c.track_id = t.id;
      c.label = t.label;
      c.frame = s.frame;
      c.box = s.box;
      const auto it = hand.find(s.frame);
      c.hand_overlap = it == hand.end() ? 0.0 : overlap(s.box, it->second);
      const ImageD patch = crop(frames.frames[s.frame].gray, s.box);
      c.blur = (patch.rows() >= 3 && patch.cols() >= 3) ? blur_score(patch)
                                                          : std::numeric_limits<double>::infinity();
      if (!best || better(c, *best)) best = c;
    }
    if (!best) continue;
    if (classify_track(t, height, config.classifier) == Role::Pickable)
      out.pickable.push_back(*best);
    else
      out.placeable.push_back(*best);
  }
  std::sort(out.pickable.begin(), out.pickable.end(), better);
  std::sort(out.placeable.begin(), out.placeable.end(), better);
  return out;
}

}  // namespace h2r::vision
