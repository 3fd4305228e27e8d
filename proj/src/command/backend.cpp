#include "h2r/command/backend.hpp"

#include <thread>

#include <httplib.h>

#include "h2r/common/errors.hpp"
#include "h2r/vision/io.hpp"

namespace h2r::command {

MockBackend::MockBackend(nlohmann::json fixture) : fixture_(std::move(fixture)) {
  if (!fixture_.is_object()) throw ConfigError("mock fixture must be a JSON object");
  if (!fixture_.contains("action")) throw ConfigError("mock fixture lacks 'action'", "/action");
  distribution_from_json(fixture_.at("action")).validate();
  if (fixture_.contains("objects") && !fixture_.at("objects").is_object())
    throw ConfigError("must be an object", "/objects");
}

ActionDistribution MockBackend::classify_action(const vision::FrameSeq&) const {
  return distribution_from_json(fixture_.at("action"));
}

ObjectLabel MockBackend::recognize_object(const vision::ImageD&, const std::string&,
                                          const ObjectHint& hint) const {
  static const nlohmann::json empty = nlohmann::json::object();
  const auto& objects = fixture_.contains("objects") ? fixture_.at("objects") : empty;
  for (const std::string& key : {hint.detector_label, "track:" + std::to_string(hint.track_id),
                                 hint.role, std::string("default")}) {
    if (key.empty() || !objects.contains(key)) continue;
    const auto& v = objects.at(key);
    return v.is_string() ? ObjectLabel::parse(v.get<std::string>()) : object_from_json(v);
  }
  throw BackendError("mock fixture has no object for track " + std::to_string(hint.track_id) +
                     " (label '" + hint.detector_label + "', role " + hint.role + ")");
}

std::string encode_pgm_base64(const vision::ImageD& image) {
  vision::Frame f;
  f.gray = image;
  return httplib::detail::base64_encode(vision::write_pnm(f));
}

struct RemoteBackend::Pool {
  std::mutex mutex;
  std::vector<std::unique_ptr<httplib::Client>> idle;
};

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), pool_(std::make_unique<Pool>()) {
  if (config_.attempts < 1) throw ConfigError("must be >= 1", "/command/remote/attempts");
  const std::string& e = config_.endpoint;
  const auto scheme = e.find("://");
  if (scheme == std::string::npos || e.substr(0, scheme) != "http")
    throw ConfigError("endpoint must be an http:// URL, got '" + e + "'", "/command/remote/endpoint");
  const auto slash = e.find('/', scheme + 3);
  host_ = slash == std::string::npos ? e : e.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : e.substr(slash);
}

RemoteBackend::~RemoteBackend() = default;

nlohmann::json RemoteBackend::post(const nlohmann::json& body) const {
  std::unique_ptr<httplib::Client> client;
  {
    std::lock_guard lock(pool_->mutex);
    if (!pool_->idle.empty()) {
      client = std::move(pool_->idle.back());
      pool_->idle.pop_back();
    }
  }
  if (!client) {
    client = std::make_unique<httplib::Client>(host_);
    client->set_connection_timeout(config_.connect_timeout);
    client->set_read_timeout(config_.read_timeout);
    client->set_keep_alive(true);
  }
  const auto give_back = [&] {
    std::lock_guard lock(pool_->mutex);
    if (pool_->idle.size() < config_.pool_size) pool_->idle.push_back(std::move(client));
  };

  const std::string payload = body.dump();
  std::string last_error;
  auto delay = config_.backoff;
  for (int attempt = 0; attempt < config_.attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client->Post(path_, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      give_back();
      throw BackendError(host_ + path_ + " answered HTTP " + std::to_string(res->status));
    }
    give_back();
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& ex) {
      throw ProtocolError(std::string("response is not JSON: ") + ex.what());
    }
    if (!j.is_object() || j.value("schema", std::string()) != kResponseSchema)
      throw ProtocolError(std::string("response schema must be '") + kResponseSchema + "'");
    return j;
  }
  throw BackendError(host_ + path_ + " failed after " + std::to_string(config_.attempts) +
                     " attempts: " + last_error);
}

ActionDistribution RemoteBackend::classify_action(const vision::FrameSeq& frames) const {
  nlohmann::json frames_b64 = nlohmann::json::array();
  for (const auto& f : frames.frames) frames_b64.push_back(encode_pgm_base64(f.gray));
  const auto j = post({{"schema", kRequestSchema}, {"kind", "action"}, {"frames_b64", frames_b64},
                       {"fps", frames.fps}, {"prompt", ""}});
  if (!j.contains("distribution")) throw ProtocolError("action response lacks 'distribution'");
  try {
    auto d = distribution_from_json(j.at("distribution"));
    d.validate();
    return d;
  } catch (const std::exception& ex) {
    throw ProtocolError(std::string("bad distribution: ") + ex.what());
  }
}

ObjectLabel RemoteBackend::recognize_object(const vision::ImageD& crop, const std::string& prompt,
                                            const ObjectHint& hint) const {
  const auto j = post({{"schema", kRequestSchema},
                       {"kind", "object"},
                       {"image_b64", encode_pgm_base64(crop)},
                       {"prompt", prompt},
                       {"hint", {{"track", hint.track_id}, {"label", hint.detector_label}, {"role", hint.role}}}});
  try {
    return object_from_json(j);
  } catch (const std::exception& ex) {
    throw ProtocolError(std::string("bad object label: ") + ex.what());
  }
}

}  // namespace h2r::command
