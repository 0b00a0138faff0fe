#pragma once

#include <charconv>
#include <string>

namespace hilltail {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal form; locale independent, so CSV output is
// byte-stable.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

}  // namespace hilltail
