#include "h2r/vision/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "h2r/common/errors.hpp"

namespace h2r::vision {

namespace {

class PnmReader {
 public:
  explicit PnmReader(const std::string& b) : b_(b) {}

  void skip_space() {
    while (pos_ < b_.size()) {
      if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) ++pos_;
    if (start == pos_) throw ProtocolError("PNM: expected a number at byte " + std::to_string(start));
    return std::stol(b_.substr(start, pos_ - start));
  }

  // Exactly one whitespace byte separates the header from binary data.
  void end_header() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
      throw ProtocolError("PNM: missing whitespace after header");
    ++pos_;
  }

  unsigned binary_sample(bool wide) {
    const std::size_t n = wide ? 2 : 1;
    if (pos_ + n > b_.size()) throw ProtocolError("PNM: truncated pixel data");
    unsigned v = static_cast<unsigned char>(b_[pos_]);
    if (wide) v = (v << 8) | static_cast<unsigned char>(b_[pos_ + 1]);
    pos_ += n;
    return v;
  }

  std::size_t pos_ = 0;
  const std::string& b_;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[at + i]);
  return v;
}

unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Frame read_pnm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ProtocolError("PNM: bad magic");
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    throw ProtocolError(std::string("PNM: unsupported format P") + kind);
  const bool color = kind == '3' || kind == '6';
  const bool ascii = kind == '2' || kind == '3';

  PnmReader r(bytes);
  r.pos_ = 2;
  const long w = r.number(), h = r.number(), maxval = r.number();
  if (w <= 0 || h <= 0) throw ProtocolError("PNM: non-positive dimensions");
  if (maxval <= 0 || maxval > 65535) throw ProtocolError("PNM: maxval out of range");
  if (!ascii) r.end_header();
  const bool wide = maxval > 255;
  const double scale = 255.0 / static_cast<double>(maxval);

  const int channels = color ? 3 : 1;
  std::vector<ImageD> planes(channels, ImageD(h, w));
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) {
        const long v = ascii ? r.number() : static_cast<long>(r.binary_sample(wide));
        if (v > maxval) throw ProtocolError("PNM: sample exceeds maxval");
        planes[c](y, x) = static_cast<double>(v) * scale;
      }
  if (color) return frame_from_rgb(planes[0], planes[1], planes[2]);
  Frame f;
  f.gray = std::move(planes[0]);
  return f;
}

Frame read_pnm_file(const std::filesystem::path& path) {
  try {
    return read_pnm(slurp(path));
  } catch (const ProtocolError& e) {
    throw ProtocolError(path.string() + ": " + e.what());
  }
}

std::string write_pnm(const Frame& frame) {
  const bool color = frame.color.has_value();
  std::string out = (color ? "P6\n" : "P5\n") + std::to_string(frame.width()) + " " +
                    std::to_string(frame.height()) + "\n255\n";
  for (Eigen::Index y = 0; y < frame.height(); ++y)
    for (Eigen::Index x = 0; x < frame.width(); ++x) {
      if (color) {
        out.push_back(static_cast<char>(to_byte(frame.color->r(y, x))));
        out.push_back(static_cast<char>(to_byte(frame.color->g(y, x))));
        out.push_back(static_cast<char>(to_byte(frame.color->b(y, x))));
      } else {
        out.push_back(static_cast<char>(to_byte(frame.gray(y, x))));
      }
    }
  return out;
}

FrameSeq read_frame_dir(const std::filesystem::path& dir, double fps) {
  if (!std::filesystem::is_directory(dir)) throw PipelineError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  FrameSeq seq;
  seq.fps = fps;
  for (const auto& f : files) seq.frames.push_back(read_pnm_file(f));
  seq.check_uniform();
  return seq;
}

std::string write_raw(const FrameSeq& seq) {
  seq.check_uniform();
  const bool color = !seq.frames.empty() && seq.frames.front().color.has_value();
  const std::uint32_t h = seq.frames.empty() ? 0 : static_cast<std::uint32_t>(seq.frames[0].height());
  const std::uint32_t w = seq.frames.empty() ? 0 : static_cast<std::uint32_t>(seq.frames[0].width());
  std::string out = "H2RT";
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(seq.size()));
  put_u32(out, h);
  put_u32(out, w);
  put_u32(out, color ? 3 : 1);
  char fps[8];
  std::memcpy(fps, &seq.fps, 8);
  out.append(fps, 8);
  for (const auto& f : seq.frames) {
    if (f.color.has_value() != color) throw ShapeError("raw container needs uniform channel count");
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x) {
        if (color) {
          out.push_back(static_cast<char>(to_byte(f.color->r(y, x))));
          out.push_back(static_cast<char>(to_byte(f.color->g(y, x))));
          out.push_back(static_cast<char>(to_byte(f.color->b(y, x))));
        } else {
          out.push_back(static_cast<char>(to_byte(f.gray(y, x))));
        }
      }
  }
  return out;
}

FrameSeq read_raw(const std::string& bytes) {
  constexpr std::size_t header = 4 + 5 * 4 + 8;
  if (bytes.size() < header || bytes.compare(0, 4, "H2RT") != 0)
    throw ProtocolError("raw container: bad magic");
  if (get_u32(bytes, 4) != 1) throw ProtocolError("raw container: unsupported version");
  const std::uint32_t n = get_u32(bytes, 8), h = get_u32(bytes, 12), w = get_u32(bytes, 16),
                      ch = get_u32(bytes, 20);
  if (ch != 1 && ch != 3) throw ProtocolError("raw container: channels must be 1 or 3");
  FrameSeq seq;
  std::memcpy(&seq.fps, bytes.data() + 24, 8);
  const std::size_t need = header + static_cast<std::size_t>(n) * h * w * ch;
  if (bytes.size() != need)
    throw ProtocolError("raw container: expected " + std::to_string(need) + " bytes, got " +
                        std::to_string(bytes.size()));
  std::size_t at = header;
  const auto next = [&] { return static_cast<double>(static_cast<unsigned char>(bytes[at++])); };
  for (std::uint32_t i = 0; i < n; ++i) {
    std::vector<ImageD> planes(ch, ImageD(h, w));
    for (std::uint32_t y = 0; y < h; ++y)
      for (std::uint32_t x = 0; x < w; ++x)
        for (std::uint32_t c = 0; c < ch; ++c) planes[c](y, x) = next();
    if (ch == 3) {
      seq.frames.push_back(frame_from_rgb(planes[0], planes[1], planes[2]));
    } else {
      Frame f;
      f.gray = std::move(planes[0]);
      seq.frames.push_back(std::move(f));
    }
  }
  return seq;
}

std::vector<Detection> read_detections_jsonl(const std::string& text) {
  std::vector<Detection> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Detection d;
      d.frame = j.at("frame_index").get<int>();
      d.box = {j.at("x_min").get<double>(), j.at("y_min").get<double>(),
               j.at("x_max").get<double>(), j.at("y_max").get<double>()};
      d.label = j.value("label", std::string());
      d.track_hint = j.value("track", -1);
      if (d.frame < 0) throw ProtocolError("negative frame_index");
      if (!d.box.valid()) throw ProtocolError("degenerate box");
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError("detections line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ProtocolError& e) {
      throw ProtocolError("detections line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string write_detections_jsonl(const std::vector<Detection>& detections) {
  std::string out;
  for (const auto& d : detections) {
    nlohmann::json j = {{"frame_index", d.frame}, {"x_min", d.box.x_min}, {"y_min", d.box.y_min},
                        {"x_max", d.box.x_max}, {"y_max", d.box.y_max}};
    if (!d.label.empty()) j["label"] = d.label;
    if (d.track_hint >= 0) j["track"] = d.track_hint;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace h2r::vision
