#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace h2r::command {

inline constexpr std::size_t kMaxTokens = 8;
inline const std::string kEmptyToken;

struct ActionDistribution {
  std::vector<std::string> labels;
  std::vector<double> probs;

  // Throws DomainError unless probabilities are >= 0 and sum to 1 (1e-9),
  // ShapeError on empty or mismatched vectors.
  void validate() const;
  // Rescales non-negative scores to sum to one.
  static ActionDistribution normalized(std::vector<std::string> labels, std::vector<double> scores);
};

struct ObjectLabel {
  std::vector<std::string> attributes;
  std::string category;
  double confidence = 1.0;

  std::vector<std::string> tokens() const;
  std::string text() const;  // "green block"
  // Last word is the category, the rest are attributes.
  static ObjectLabel parse(const std::string& text, double confidence = 1.0);
  void validate() const;
  friend bool operator==(const ObjectLabel& a, const ObjectLabel& b) {
    return a.attributes == b.attributes && a.category == b.category;
  }
};

using TokenList = std::array<std::string, kMaxTokens>;

struct CommandSentence {
  std::string action;
  ObjectLabel target;
  std::optional<ObjectLabel> destination;
  TokenList tokens;
};

// Appends empty tokens up to 8; ShapeError beyond 8 content tokens.
TokenList pad(const std::vector<std::string>& tokens);
// Tokens with padding removed.
std::vector<std::string> content_tokens(const TokenList& tokens);

// Argmax action (ties go to the lexicographically smallest label) joined with
// the object tokens: action, target, then destination.
CommandSentence fuse(const ActionDistribution& a, const ObjectLabel& target,
                     const std::optional<ObjectLabel>& destination = std::nullopt);

// Default vocabulary. "touch" is accepted as an alias of reach.
std::vector<std::string> default_actions();
bool needs_destination(const std::string& action);

// Fixed per-action templates:
//   reach  "Touch the <target>"
//   pick   "Pick the <target> up"
//   move   "Move the <target> to <destination>"
//   put    "Put the <target> into <destination>"
//   other  "<Action> the <target>" [+ " to <destination>"]
std::string render(const CommandSentence& c);

struct ParsedCommand {
  std::string action;
  ObjectLabel target;
  std::optional<ObjectLabel> destination;
};
// Inverse of render. Throws ProtocolError on text that fits no template.
ParsedCommand parse_rendered(const std::string& text);

nlohmann::json to_json(const ActionDistribution& a);
ActionDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ObjectLabel& o);
ObjectLabel object_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CommandSentence& c);

}  // namespace h2r::command
