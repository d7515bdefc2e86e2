#pragma once

#include <string>

#include "xmodal/encoder.hpp"
#include "xmodal/optimizer.hpp"

namespace xmodal {

// JSON names shared by checkpoint headers and the CLI configuration file.
std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);
std::string freeze_name(FreezeBranch f);
FreezeBranch parse_freeze(const std::string& name);

}  // namespace xmodal
