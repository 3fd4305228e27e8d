#include "h2r/vision/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace h2r::vision {

ImageD checkerboard(int rows, int cols, int cell, double lo, double hi) {
  if (rows <= 0 || cols <= 0 || cell <= 0) throw ShapeError("checkerboard dimensions must be > 0");
  ImageD img(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) img(y, x) = ((y / cell + x / cell) % 2) ? hi : lo;
  return img;
}

ImageD box_blur(const ImageD& image, int radius) {
  if (radius <= 0) return image;
  const Eigen::Index h = image.rows(), w = image.cols();
  ImageD out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      double s = 0.0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const auto yy = std::clamp<Eigen::Index>(y + dy, 0, h - 1);
          const auto xx = std::clamp<Eigen::Index>(x + dx, 0, w - 1);
          s += image(yy, xx);
        }
      out(y, x) = s / static_cast<double>((2 * radius + 1) * (2 * radius + 1));
    }
  return out;
}

FrameSeq render_detections(const std::vector<Detection>& detections,
                           const SyntheticVideoSpec& spec) {
  if (spec.frames < 1 || spec.height < 3 || spec.width < 3)
    throw ShapeError("synthetic video needs at least one 3x3 frame");
  FrameSeq seq;
  seq.fps = spec.fps;
  seq.frames.resize(spec.frames);
  for (auto& f : seq.frames) f.gray = ImageD::Constant(spec.height, spec.width, 128.0);

  // Objects first, hands on top.
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& d : detections) {
      if ((d.label == "hand") != (pass == 1)) continue;
      if (d.frame < 0 || d.frame >= spec.frames) continue;
      ImageD& g = seq.frames[d.frame].gray;
      const auto x0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(d.box.x_min)), 0, g.cols());
      const auto y0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(d.box.y_min)), 0, g.rows());
      const auto x1 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(d.box.x_max)), 0, g.cols());
      const auto y1 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(d.box.y_max)), 0, g.rows());
      if (x1 <= x0 || y1 <= y0) continue;
      if (pass == 1)
        g.block(y0, x0, y1 - y0, x1 - x0).setConstant(180.0);
      else
        g.block(y0, x0, y1 - y0, x1 - x0) =
            checkerboard(static_cast<int>(y1 - y0), static_cast<int>(x1 - x0), 3);
    }
  for (int i : spec.blurred)
    if (i >= 0 && i < spec.frames) seq.frames[i].gray = box_blur(seq.frames[i].gray, spec.blur_radius);
  return seq;
}

}  // namespace h2r::vision
