#include "h2r/command/command.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "h2r/common/errors.hpp"

namespace h2r::command {

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void ActionDistribution::validate() const {
  if (labels.empty()) throw ShapeError("action distribution has an empty vocabulary");
  if (labels.size() != probs.size())
    throw ShapeError("action distribution has " + std::to_string(labels.size()) + " labels but " +
                     std::to_string(probs.size()) + " probabilities");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw DomainError("probability of '" + labels[i] + "' is negative or NaN");
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DomainError("action probabilities sum to " + std::to_string(sum));
}

ActionDistribution ActionDistribution::normalized(std::vector<std::string> labels,
                                                  std::vector<double> scores) {
  if (labels.empty()) throw ShapeError("action distribution has an empty vocabulary");
  if (labels.size() != scores.size()) throw ShapeError("labels and scores differ in length");
  double sum = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0)) throw DomainError("action scores must be non-negative");
    sum += s;
  }
  if (!(sum > 0.0)) throw DomainError("action scores sum to zero");
  for (double& s : scores) s /= sum;
  return {std::move(labels), std::move(scores)};
}

std::vector<std::string> ObjectLabel::tokens() const {
  std::vector<std::string> t = attributes;
  t.push_back(category);
  return t;
}

std::string ObjectLabel::text() const { return join(tokens()); }

ObjectLabel ObjectLabel::parse(const std::string& text, double confidence) {
  auto words = split_words(text);
  if (words.empty()) throw DomainError("object label is empty");
  ObjectLabel o;
  o.category = words.back();
  words.pop_back();
  o.attributes = std::move(words);
  o.confidence = confidence;
  return o;
}

void ObjectLabel::validate() const {
  if (category.empty()) throw DomainError("object label has an empty category");
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw DomainError("object confidence must be in [0, 1]");
}

TokenList pad(const std::vector<std::string>& tokens) {
  if (tokens.size() > kMaxTokens)
    throw ShapeError("command has " + std::to_string(tokens.size()) + " content tokens, limit is " +
                     std::to_string(kMaxTokens));
  TokenList out;
  std::copy(tokens.begin(), tokens.end(), out.begin());
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(tokens.size()), out.end(), kEmptyToken);
  return out;
}

std::vector<std::string> content_tokens(const TokenList& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens)
    if (!t.empty()) out.push_back(t);
  return out;
}

CommandSentence fuse(const ActionDistribution& a, const ObjectLabel& target,
                     const std::optional<ObjectLabel>& destination) {
  a.validate();
  target.validate();
  if (destination) destination->validate();
  std::size_t best = 0;
  for (std::size_t i = 1; i < a.labels.size(); ++i)
    if (a.probs[i] > a.probs[best] || (a.probs[i] == a.probs[best] && a.labels[i] < a.labels[best]))
      best = i;

  CommandSentence c;
  c.action = a.labels[best];
  c.target = target;
  c.destination = destination;
  std::vector<std::string> tokens{c.action};
  for (const auto& t : target.tokens()) tokens.push_back(t);
  if (destination)
    for (const auto& t : destination->tokens()) tokens.push_back(t);
  c.tokens = pad(tokens);
  return c;
}

std::vector<std::string> default_actions() { return {"move", "pick", "put", "reach"}; }

bool needs_destination(const std::string& action) { return action == "move" || action == "put"; }

std::string render(const CommandSentence& c) {
  const std::string target = c.target.text();
  const std::string a = lower(c.action);
  if (a == "reach" || a == "touch") return "Touch the " + target;
  if (a == "pick") return "Pick the " + target + " up";
  if (a == "put" || a == "move") {
    if (!c.destination) throw DomainError("'" + a + "' needs a destination object");
    return capitalize(a) + " the " + target + (a == "put" ? " into " : " to ") + c.destination->text();
  }
  std::string s = capitalize(a) + " the " + target;
  if (c.destination) s += " to " + c.destination->text();
  return s;
}

ParsedCommand parse_rendered(const std::string& text) {
  const auto words = split_words(text);
  if (words.size() < 3 || words[1] != "the")
    throw ProtocolError("'" + text + "' does not match any command template");
  ParsedCommand p;
  const std::string verb = lower(words[0]);
  std::string rest = join(std::vector<std::string>(words.begin() + 2, words.end()));

  const auto split_at = [&](const std::string& sep) -> bool {
    const auto pos = rest.find(sep);
    if (pos == std::string::npos) return false;
    p.target = ObjectLabel::parse(rest.substr(0, pos));
    p.destination = ObjectLabel::parse(rest.substr(pos + sep.size()));
    return true;
  };

  if (verb == "touch") {
    p.action = "reach";
    p.target = ObjectLabel::parse(rest);
  } else if (verb == "pick") {
    if (!ends_with(rest, " up")) throw ProtocolError("pick command must end with 'up': '" + text + "'");
    p.action = "pick";
    p.target = ObjectLabel::parse(rest.substr(0, rest.size() - 3));
  } else if (verb == "put") {
    p.action = "put";
    if (!split_at(" into ")) throw ProtocolError("put command lacks 'into': '" + text + "'");
  } else {
    p.action = verb;
    if (!split_at(" to ")) {
      if (verb == "move") throw ProtocolError("move command lacks 'to': '" + text + "'");
      p.target = ObjectLabel::parse(rest);
    }
  }
  return p;
}

nlohmann::json to_json(const ActionDistribution& a) {
  nlohmann::json d = nlohmann::json::object();
  for (std::size_t i = 0; i < a.labels.size(); ++i) d[a.labels[i]] = a.probs[i];
  return d;
}

ActionDistribution distribution_from_json(const nlohmann::json& j) {
  ActionDistribution a;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (!v.is_number()) throw ProtocolError("probability of '" + k + "' is not a number");
      a.labels.push_back(k);
      a.probs.push_back(v.get<double>());
    }
  } else if (j.is_array()) {
    for (const auto& e : j) {
      a.labels.push_back(e.at("label").get<std::string>());
      a.probs.push_back(e.at("p").get<double>());
    }
  } else {
    throw ProtocolError("distribution must be an object or an array");
  }
  return a;
}

nlohmann::json to_json(const ObjectLabel& o) {
  return {{"attributes", o.attributes}, {"category", o.category}, {"confidence", o.confidence}};
}

ObjectLabel object_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError("object label must be a JSON object");
  const double conf = j.contains("confidence") ? j.at("confidence").get<double>() : 1.0;
  ObjectLabel o;
  if (j.contains("category")) {
    o.category = j.at("category").get<std::string>();
    if (j.contains("attributes")) o.attributes = j.at("attributes").get<std::vector<std::string>>();
    o.confidence = conf;
  } else if (j.contains("label")) {
    o = ObjectLabel::parse(j.at("label").get<std::string>(), conf);
  } else {
    throw ProtocolError("object label needs 'category' or 'label'");
  }
  o.validate();
  return o;
}

nlohmann::json to_json(const CommandSentence& c) {
  nlohmann::json j = {{"action", c.action},
                      {"target", to_json(c.target)},
                      {"tokens", std::vector<std::string>(c.tokens.begin(), c.tokens.end())},
                      {"text", render(c)}};
  if (c.destination) j["destination"] = to_json(*c.destination);
  return j;
}

}  // namespace h2r::command
