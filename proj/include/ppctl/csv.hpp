#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>

namespace ppctl::csv {

/// Shortest decimal string with 17 significant digits; round-trips a double
/// exactly. All numeric CSV cells go through this so re-runs are comparable
/// byte for byte.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string num(std::int64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  return buf;
}

}  // namespace ppctl::csv
