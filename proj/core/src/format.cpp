#include "kdvstar/format.hpp"

#include <cmath>
#include <cstdio>

namespace kdvstar {

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* version() { return KDVSTAR_VERSION; }

}  // namespace kdvstar
