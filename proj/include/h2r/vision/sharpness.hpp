#pragma once

#include <vector>

#include "h2r/vision/boxes.hpp"
#include "h2r/vision/image.hpp"

namespace h2r::vision {

// Valid-region response to the 4-neighbour Laplacian kernel
// [[0,1,0],[1,-4,1],[0,1,0]]; output is (H-2) x (W-2).
template <typename Derived>
Image<typename Derived::Scalar> laplacian_response(const Eigen::ArrayBase<Derived>& crop) {
  const Eigen::Index h = crop.rows(), w = crop.cols();
  if (h < 3 || w < 3) throw ShapeError("Laplacian needs a crop of at least 3x3");
  const Eigen::Index oh = h - 2, ow = w - 2;
  return crop.block(0, 1, oh, ow) + crop.block(2, 1, oh, ow) + crop.block(1, 0, oh, ow) +
         crop.block(1, 2, oh, ow) - 4 * crop.block(1, 1, oh, ow);
}

// Negative population variance of the Laplacian response: lower is sharper.
template <typename Derived>
double blur_score(const Eigen::ArrayBase<Derived>& crop) {
  const auto r = laplacian_response(crop.template cast<double>().eval());
  const double mean = r.mean();
  return -(r - mean).square().mean();
}

// Pixel rectangle of `box` clipped to the frame, rounded outwards.
ImageD crop(const ImageD& image, const BBox& box);

struct KeyframeConfig {
  double pixel_thresh = 25.0;  // on the 0..255 scale
  double frac_thresh = 0.02;
};

// Frame i (i >= 1) is a keyframe when the fraction of pixels whose grayscale
// value changed by more than pixel_thresh since frame i-1 exceeds frac_thresh.
std::vector<std::size_t> extract_keyframes(const FrameSeq& seq, const KeyframeConfig& config = {});

// Changed-pixel fraction for every consecutive pair (length n-1).
std::vector<double> change_fractions(const FrameSeq& seq, double pixel_thresh);

}  // namespace h2r::vision
