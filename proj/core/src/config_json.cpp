#include "xmodal/config_json.hpp"

#include "xmodal/error.hpp"

namespace xmodal {

std::string activation_name(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + name + "' (valid: relu, tanh)");
}

std::string freeze_name(FreezeBranch f) {
  switch (f) {
    case FreezeBranch::None: return "none";
    case FreezeBranch::A: return "A";
    case FreezeBranch::B: return "B";
  }
  return "none";
}

FreezeBranch parse_freeze(const std::string& name) {
  if (name == "none") return FreezeBranch::None;
  if (name == "A") return FreezeBranch::A;
  if (name == "B") return FreezeBranch::B;
  throw ConfigError("unknown freeze_branch '" + name + "' (valid: none, A, B)");
}

}  // namespace xmodal
