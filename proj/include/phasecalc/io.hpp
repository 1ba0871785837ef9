#pragma once

#include <cstdio>
#include <string>

namespace phasecalc {

// 17 significant digits, enough to round-trip an IEEE double exactly
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace phasecalc
