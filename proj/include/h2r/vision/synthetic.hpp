#pragma once

#include <cstdint>
#include <vector>

#include "h2r/vision/boxes.hpp"
#include "h2r/vision/image.hpp"

namespace h2r::vision {

struct SyntheticVideoSpec {
  int frames = 30;
  int height = 96;
  int width = 128;
  double fps = 30.0;
  // Box-blur radius applied to frames listed in `blurred` (0 disables).
  int blur_radius = 2;
  std::vector<int> blurred;
};

// Mid-gray background with each detection painted as a textured rectangle in
// its frame. Hands ("hand" label) are drawn flat so that they cover objects.
FrameSeq render_detections(const std::vector<Detection>& detections,
                           const SyntheticVideoSpec& spec);

// Mean filter with a (2r+1)^2 window, edges clamped.
ImageD box_blur(const ImageD& image, int radius);

// High-contrast checkerboard patch with `cell`-pixel squares.
ImageD checkerboard(int rows, int cols, int cell, double lo = 40.0, double hi = 215.0);

}  // namespace h2r::vision
