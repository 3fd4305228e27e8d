#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "h2r/common/errors.hpp"

namespace h2r::vision {

// Row-major so that a frame's memory layout matches image files.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ImageD = Image<double>;

struct ColorPlanes {
  ImageD r, g, b;
};

// Intensities on the 0..255 scale.
struct Frame {
  ImageD gray;
  std::optional<ColorPlanes> color;

  Eigen::Index height() const { return gray.rows(); }
  Eigen::Index width() const { return gray.cols(); }
};

struct FrameSeq {
  std::vector<Frame> frames;
  double fps = 30.0;

  std::size_t size() const { return frames.size(); }
  // Throws ShapeError unless every frame has the same dimensions.
  void check_uniform() const;
};

// ITU-R BT.601 luma.
template <typename Derived>
ImageD to_gray(const Eigen::ArrayBase<Derived>& r, const Eigen::ArrayBase<Derived>& g,
               const Eigen::ArrayBase<Derived>& b) {
  return 0.299 * r.template cast<double>() + 0.587 * g.template cast<double>() +
         0.114 * b.template cast<double>();
}

Frame frame_from_rgb(const ImageD& r, const ImageD& g, const ImageD& b);

// Evenly strided subset keeping the first and last frame;
// |output| = max(2, round(n * keep_ratio)).
FrameSeq downsample_frames(const FrameSeq& seq, double keep_ratio);
std::vector<std::size_t> downsample_indices(std::size_t n, double keep_ratio);

}  // namespace h2r::vision
