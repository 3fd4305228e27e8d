#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "h2r/command/command.hpp"
#include "h2r/vision/image.hpp"

namespace h2r::command {

// What the pipeline knows about a crop besides its pixels.
struct ObjectHint {
  int track_id = -1;
  std::string detector_label;
  std::string role;  // "pickable" or "placeable"
};

class RecognizerBackend {
 public:
  virtual ~RecognizerBackend() = default;
  virtual ActionDistribution classify_action(const vision::FrameSeq& frames) const = 0;
  virtual ObjectLabel recognize_object(const vision::ImageD& crop, const std::string& prompt,
                                       const ObjectHint& hint) const = 0;
};

inline const std::string kObjectPrompt =
    "Name the color and category of the object in this image in at most three words.";

// Answers from a fixture:
//   {"action": {"pick": 0.9, ...},
//    "objects": {"<detector label>" | "track:<id>" | "pickable" | "placeable" | "default": label}}
// Object lookup tries the detector label, then the track id, then the role,
// then "default".
class MockBackend final : public RecognizerBackend {
 public:
  explicit MockBackend(nlohmann::json fixture);
  ActionDistribution classify_action(const vision::FrameSeq& frames) const override;
  ObjectLabel recognize_object(const vision::ImageD& crop, const std::string& prompt,
                               const ObjectHint& hint) const override;

 private:
  nlohmann::json fixture_;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/recognize
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds read_timeout{10000};
  int attempts = 3;
  std::chrono::milliseconds backoff{100};  // doubled after every failed attempt
  std::size_t pool_size = 4;
};

inline constexpr const char* kRequestSchema = "h2r.recognize.request/1";
inline constexpr const char* kResponseSchema = "h2r.recognize.response/1";

// JSON over HTTP POST. Requests carry base64 PGM images; responses must be
// {"schema": kResponseSchema, "label": ..., "confidence": ...} for objects or
// {"schema": kResponseSchema, "distribution": {...}} for actions.
// Transport failures and 5xx answers are retried; exhausting the attempts
// raises BackendError, malformed answers raise ProtocolError immediately.
class RemoteBackend final : public RecognizerBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  ~RemoteBackend() override;
  ActionDistribution classify_action(const vision::FrameSeq& frames) const override;
  ObjectLabel recognize_object(const vision::ImageD& crop, const std::string& prompt,
                               const ObjectHint& hint) const override;

  // Sends one request body, returns the parsed response.
  nlohmann::json post(const nlohmann::json& body) const;

 private:
  struct Pool;
  RemoteConfig config_;
  std::string host_, path_;
  std::unique_ptr<Pool> pool_;
};

std::string encode_pgm_base64(const vision::ImageD& image);

}  // namespace h2r::command
