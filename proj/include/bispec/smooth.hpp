#pragma once

#include <cmath>

namespace bispec {

/// C-infinity step: 0 for s <= 0, 1 for s >= 1, built from exp(-1/s).
inline double smooth_step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

/// Even C-infinity plateau: 1 on [-1, 1], 0 outside (-2, 2), values in [0, 1].
inline double plateau(double t) { return 1.0 - smooth_step(std::abs(t) - 1.0); }

/// sin(x) / x with the removable singularity filled in.
inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

}  // namespace bispec
