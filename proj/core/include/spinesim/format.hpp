#pragma once

#include <string>

namespace spinesim {

/// Decimal with 17 significant digits (round-trips every double).
std::string fmt17(double v);

}  // namespace spinesim
