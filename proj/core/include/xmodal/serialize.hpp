#pragma once

#include <string>

#include "xmodal/math.hpp"

namespace xmodal {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Comma-separated full-precision rendering of a vector.
std::string format_vector(const Vector& v);

// Parses a comma-separated list of doubles. context is prepended to error
// messages ("file:line: ...").
Vector parse_vector(const std::string& text, const std::string& context);

double parse_double(const std::string& text, const std::string& context);

}  // namespace xmodal
