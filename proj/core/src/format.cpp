#include "spinesim/format.hpp"

#include <cstdio>

namespace spinesim {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace spinesim
