#pragma once

#include <cstdio>
#include <string>

namespace gramevo::detail {

// Shortest-roundtrip-ish formatting, locale-independent ('.' decimal point).
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace gramevo::detail
