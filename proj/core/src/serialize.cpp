#include "xmodal/serialize.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "xmodal/error.hpp"

namespace xmodal {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_vector(const Vector& v) {
  std::string out;
  out.reserve(v.size() * 12);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += format_double(v[i]);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError(context + ": invalid number '" + text + "'");
  }
  return value;
}

Vector parse_vector(const std::string& text, const std::string& context) {
  Vector out;
  if (text.empty()) {
    throw DataError(context + ": empty vector field");
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    const std::size_t stop = comma == std::string::npos ? text.size() : comma;
    out.push_back(parse_double(text.substr(start, stop - start), context));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace xmodal
