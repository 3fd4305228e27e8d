#include "h2r/vision/boxes.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "h2r/common/errors.hpp"

namespace h2r::vision {

double overlap(const BBox& a, const BBox& b) {
  if (!a.valid() || !b.valid()) return 0.0;
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

std::vector<Eigen::Vector2d> Track::centroids() const {
  std::vector<Eigen::Vector2d> c;
  c.reserve(samples.size());
  for (const auto& s : samples) c.push_back(s.box.centroid());
  return c;
}

namespace {

std::vector<Track> finish(std::vector<Track> tracks, std::size_t min_samples) {
  std::vector<Track> out;
  for (auto& t : tracks) {
    if (t.samples.size() < min_samples) continue;
    std::sort(t.samples.begin(), t.samples.end(),
              [](const TrackSample& a, const TrackSample& b) { return a.frame < b.frame; });
    out.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

}  // namespace

std::vector<Track> track_objects(const std::vector<Detection>& detections,
                                 const TrackerConfig& config) {
  for (const auto& d : detections)
    if (!d.box.valid()) throw ShapeError("degenerate detection box in frame " + std::to_string(d.frame));

  const bool hinted = !detections.empty() &&
                      std::all_of(detections.begin(), detections.end(),
                                  [](const Detection& d) { return d.track_hint >= 0; });
  if (hinted) {
    std::map<int, Track> by_hint;
    for (const auto& d : detections) {
      Track& t = by_hint[d.track_hint];
      if (t.label.empty()) t.label = d.label;
      t.samples.push_back({d.frame, d.box});
    }
    std::vector<Track> tracks;
    for (auto& [hint, t] : by_hint) tracks.push_back(std::move(t));
    return finish(std::move(tracks), config.min_samples);
  }

  // Stable order within a frame so results do not depend on input order.
  std::vector<Detection> sorted = detections;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Detection& a, const Detection& b) {
    return std::tie(a.frame, a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max, a.label) <
           std::tie(b.frame, b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max, b.label);
  });

  std::vector<Track> tracks;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].frame == sorted[i].frame) ++j;
    const int frame = sorted[i].frame;

    struct Pair {
      double iou;
      std::size_t track, det;
    };
    std::vector<Pair> pairs;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      if (tracks[t].samples.back().frame == frame) continue;
      for (std::size_t d = i; d < j; ++d) {
        const double iou = overlap(tracks[t].samples.back().box, sorted[d].box);
        if (iou >= config.iou_threshold) pairs.push_back({iou, t, d});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      if (a.track != b.track) return a.track < b.track;
      return a.det < b.det;
    });
    std::vector<bool> track_used(tracks.size(), false), det_used(j - i, false);
    for (const auto& p : pairs) {
      if (track_used[p.track] || det_used[p.det - i]) continue;
      track_used[p.track] = true;
      det_used[p.det - i] = true;
      tracks[p.track].samples.push_back({frame, sorted[p.det].box});
    }
    for (std::size_t d = i; d < j; ++d) {
      if (det_used[d - i]) continue;
      Track t;
      t.label = sorted[d].label;
      t.samples.push_back({frame, sorted[d].box});
      tracks.push_back(std::move(t));
    }
    i = j;
  }
  return finish(std::move(tracks), config.min_samples);
}

std::string to_string(Role r) { return r == Role::Pickable ? "pickable" : "placeable"; }

Role classify_track(const Track& track, double frame_height, const ClassifierConfig& config) {
  if (!(frame_height > 0.0)) throw DomainError("frame height must be > 0");
  if (track.samples.size() < config.min_samples)
    throw ShapeError("track " + std::to_string(track.id) + " has " +
                     std::to_string(track.samples.size()) + " samples, need " +
                     std::to_string(config.min_samples));
  const auto c = track.centroids();
  double excursion = 0.0, mean_y = 0.0;
  for (const auto& p : c) {
    excursion = std::max(excursion, (p - c.front()).norm());
    mean_y += p.y();
  }
  mean_y /= static_cast<double>(c.size());
  double var_y = 0.0;
  for (const auto& p : c) var_y += (p.y() - mean_y) * (p.y() - mean_y);
  var_y /= static_cast<double>(c.size());

  if (excursion > config.disp_thresh * frame_height) return Role::Pickable;
  if (var_y / (frame_height * frame_height) > config.var_thresh) return Role::Pickable;
  return Role::Placeable;
}

}  // namespace h2r::vision
