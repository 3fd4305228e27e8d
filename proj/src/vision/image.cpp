#include "h2r/vision/image.hpp"

#include <cmath>

namespace h2r::vision {

void FrameSeq::check_uniform() const {
  if (frames.empty()) return;
  const auto h = frames.front().height(), w = frames.front().width();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (f.height() != h || f.width() != w)
      throw ShapeError("frame " + std::to_string(i) + " is " + std::to_string(f.height()) + "x" +
                       std::to_string(f.width()) + ", expected " + std::to_string(h) + "x" +
                       std::to_string(w));
  }
}

Frame frame_from_rgb(const ImageD& r, const ImageD& g, const ImageD& b) {
  if (r.rows() != g.rows() || r.rows() != b.rows() || r.cols() != g.cols() ||
      r.cols() != b.cols())
    throw ShapeError("color planes differ in size");
  Frame f;
  f.gray = to_gray(r, g, b);
  f.color = ColorPlanes{r, g, b};
  return f;
}

std::vector<std::size_t> downsample_indices(std::size_t n, double keep_ratio) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0))
    throw DomainError("keep_ratio must be in (0, 1]");
  if (n < 2) throw ShapeError("need at least 2 frames to downsample");
  const auto k = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(static_cast<double>(n) * keep_ratio)));
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i)
    idx[i] = static_cast<std::size_t>(
        std::llround(static_cast<double>(i) * static_cast<double>(n - 1) / static_cast<double>(k - 1)));
  return idx;
}

FrameSeq downsample_frames(const FrameSeq& seq, double keep_ratio) {
  FrameSeq out;
  out.fps = seq.fps * keep_ratio;
  for (std::size_t i : downsample_indices(seq.size(), keep_ratio)) out.frames.push_back(seq.frames[i]);
  return out;
}

}  // namespace h2r::vision
