#include "h2r/neural/mlp.hpp"

namespace h2r::neural {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity:
      return "identity";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("unknown activation '" + s + "'");
}

void MlpSpec::validate() const {
  if (input <= 0) throw ShapeError("network input width must be > 0");
  if (hidden.empty()) throw ShapeError("network needs at least one hidden layer");
  for (int w : hidden)
    if (w <= 0) throw ShapeError("hidden widths must be > 0");
  if (heads.empty()) throw ShapeError("network needs at least one output head");
  for (const auto& h : heads)
    if (h.width <= 0) throw ShapeError("output head widths must be > 0");
}

nlohmann::json spec_to_json(const MlpSpec& spec) {
  nlohmann::json heads = nlohmann::json::array();
  for (const auto& h : spec.heads) heads.push_back({{"activation", to_string(h.activation)}, {"width", h.width}});
  return {{"input", spec.input},
          {"hidden", spec.hidden},
          {"hidden_activation", to_string(spec.hidden_activation)},
          {"heads", heads}};
}

MlpSpec spec_from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.input = j.at("input").get<int>();
  spec.hidden = j.at("hidden").get<std::vector<int>>();
  spec.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
  spec.heads.clear();
  for (const auto& h : j.at("heads"))
    spec.heads.push_back({activation_from_string(h.at("activation").get<std::string>()), h.at("width").get<int>()});
  spec.validate();
  return spec;
}

}  // namespace h2r::neural
