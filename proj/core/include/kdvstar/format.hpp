#pragma once

#include <string>

namespace kdvstar {

// Fixed 17 significant digits so text outputs round-trip and are stable.
std::string fmt17(double v);

const char* version();

}  // namespace kdvstar
