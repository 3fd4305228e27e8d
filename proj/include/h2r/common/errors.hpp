#pragma once

#include <stdexcept>
#include <string>

namespace h2r {

// Input violates a mathematical precondition (out-of-range joint, non-unit
// direction, non-finite value).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Operation is not valid in the current object state (step after
// termination, sampling an underfilled buffer, ...).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad or inconsistent configuration. `path` points at the offending field
// when one is known, e.g. "/td3/gamma".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Size or shape mismatch between tensors, token lists, frames.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace h2r
