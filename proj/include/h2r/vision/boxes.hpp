#pragma once

#include <string>
#include <vector>

#include "h2r/common/types.hpp"

namespace h2r::vision {

struct BBox {
  double x_min = 0.0, y_min = 0.0, x_max = 1.0, y_max = 1.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Eigen::Vector2d centroid() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool valid() const { return x_min < x_max && y_min < y_max; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

// Intersection over union; 0 when either box is degenerate.
double overlap(const BBox& a, const BBox& b);

struct Detection {
  int frame = 0;
  BBox box;
  std::string label;
  int track_hint = -1;
};

struct TrackSample {
  int frame = 0;
  BBox box;
};

struct Track {
  int id = 0;
  std::string label;
  std::vector<TrackSample> samples;

  std::vector<Eigen::Vector2d> centroids() const;
};

struct TrackerConfig {
  double iou_threshold = 0.3;
  std::size_t min_samples = 3;
};

// Greedy IoU association frame by frame: the highest-IoU (track, detection)
// pair is matched first, unmatched detections open new tracks. When every
// detection carries a track hint the hints are used instead. Tracks shorter
// than min_samples are dropped; ids follow creation order.
std::vector<Track> track_objects(const std::vector<Detection>& detections,
                                 const TrackerConfig& config = {});

enum class Role { Pickable, Placeable };
std::string to_string(Role r);

struct ClassifierConfig {
  // Fractions of the frame height.
  double disp_thresh = 0.15;
  // Variance of the centroid's vertical coordinate divided by height^2.
  double var_thresh = 0.002;
  std::size_t min_samples = 3;
};

// Pickable when the centroid strays further than disp_thresh * H from where
// it started, or its vertical coordinate oscillates (variance / H^2 above
// var_thresh). Static objects are placeable.
Role classify_track(const Track& track, double frame_height, const ClassifierConfig& config = {});

}  // namespace h2r::vision
