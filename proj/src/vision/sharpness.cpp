#include "h2r/vision/sharpness.hpp"

#include <algorithm>
#include <cmath>

namespace h2r::vision {

ImageD crop(const ImageD& image, const BBox& box) {
  const auto x0 = static_cast<Eigen::Index>(std::max(0.0, std::floor(box.x_min)));
  const auto y0 = static_cast<Eigen::Index>(std::max(0.0, std::floor(box.y_min)));
  const auto x1 = std::min<Eigen::Index>(image.cols(), static_cast<Eigen::Index>(std::ceil(box.x_max)));
  const auto y1 = std::min<Eigen::Index>(image.rows(), static_cast<Eigen::Index>(std::ceil(box.y_max)));
  if (x1 <= x0 || y1 <= y0) throw ShapeError("box lies outside the frame");
  return image.block(y0, x0, y1 - y0, x1 - x0);
}

std::vector<double> change_fractions(const FrameSeq& seq, double pixel_thresh) {
  seq.check_uniform();
  std::vector<double> out;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const auto& a = seq.frames[i - 1].gray;
    const auto& b = seq.frames[i].gray;
    const auto changed = ((b - a).abs() > pixel_thresh).count();
    out.push_back(static_cast<double>(changed) / static_cast<double>(a.size()));
  }
  return out;
}

std::vector<std::size_t> extract_keyframes(const FrameSeq& seq, const KeyframeConfig& config) {
  if (!(config.frac_thresh >= 0.0 && config.frac_thresh <= 1.0))
    throw DomainError("frac_thresh must be in [0, 1]");
  if (!(config.pixel_thresh >= 0.0)) throw DomainError("pixel_thresh must be >= 0");
  const auto fr = change_fractions(seq, config.pixel_thresh);
  std::vector<std::size_t> keys;
  for (std::size_t i = 0; i < fr.size(); ++i)
    if (fr[i] > config.frac_thresh) keys.push_back(i + 1);
  return keys;
}

}  // namespace h2r::vision
