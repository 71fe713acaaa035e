#pragma once

#include <string>

namespace mcf {

// Fixed 12-significant-digit rendering used by every emitted artifact.
std::string num(double x);

}  // namespace mcf
