#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "h2r/vision/boxes.hpp"
#include "h2r/vision/image.hpp"

namespace h2r::vision {

// Binary (P5/P6) and ASCII (P2/P3) netpbm images. Samples are returned on
// their native scale; maxval other than 255 is rescaled to 0..255.
Frame read_pnm(const std::string& bytes);
Frame read_pnm_file(const std::filesystem::path& path);
// Writes P6 when the frame has color planes, P5 otherwise (values rounded and
// clamped to 0..255).
std::string write_pnm(const Frame& frame);

// Every *.pgm / *.ppm in `dir`, sorted by filename.
FrameSeq read_frame_dir(const std::filesystem::path& dir, double fps = 30.0);

// Raw tensor container: "H2RT", then little-endian u32 version, frame count,
// height, width, channels (1 or 3), f64 fps, followed by u8 samples in
// frame, row, column, channel order.
std::string write_raw(const FrameSeq& seq);
FrameSeq read_raw(const std::string& bytes);

// One JSON object per line: frame_index, x_min, y_min, x_max, y_max and
// optional label and track.
std::vector<Detection> read_detections_jsonl(const std::string& text);
std::string write_detections_jsonl(const std::vector<Detection>& detections);

}  // namespace h2r::vision
