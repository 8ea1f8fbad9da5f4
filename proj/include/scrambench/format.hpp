#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace scrambench {

/// Fractions are written with six decimal places.
inline double round6(double v) {
    const double r = std::round(v * 1e6) / 1e6;
    return r == 0.0 ? 0.0 : r; // no "-0"
}

inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", round6(v));
    return buf;
}

/// Currency is written as whole dollars.
inline std::int64_t whole_usd(double v) { return static_cast<std::int64_t>(std::llround(v)); }

} // namespace scrambench
