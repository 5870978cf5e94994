#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace hywm::detail {

/// Fixed six-decimal rendering used by every CSV the library writes.
inline std::string fixed6(double v) {
  if (v == 0.0) v = 0.0;  // fold -0
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

}  // namespace hywm::detail
