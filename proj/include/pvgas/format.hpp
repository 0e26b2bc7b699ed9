#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include "pvgas/common.hpp"

/// Lossless text encoding of doubles shared by every file format.
namespace pvgas::format {

inline std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

/// Shortest round-trip decimal (17 significant digits).
inline std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_real(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0') throw ArgumentError("not a number: '" + tok + "'");
  return v;
}

}  // namespace pvgas::format
