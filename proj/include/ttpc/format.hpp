#pragma once

#include <cstdio>
#include <string>

namespace ttpc {

/// '.' decimal separator, 12 significant digits, no negative zero.
inline std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace ttpc
