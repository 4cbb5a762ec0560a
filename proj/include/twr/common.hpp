// SPDX-License-Identifier: Apache-2.0
//
// twrhar: through-the-wall radar human activity recognition toolkit.
// Shared constants and error types.

#ifndef TWR_COMMON_HPP
#define TWR_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace twr {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Invalid or inconsistent input data (bad config, dimension mismatch,
/// unreadable file). CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (non-convergence, invalid parameter domain).
/// CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Power iteration ran out of iterations; carries the last estimate.
struct NonConvergenceError : NumericError {
    double last_estimate;
    NonConvergenceError(const std::string& what, double last)
        : NumericError(what), last_estimate(last) {}
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Hermite smoothstep, 0 below t0, 1 above t1.
inline double smoothstep(double t, double t0, double t1) {
    if (t <= t0) return 0.0;
    if (t >= t1) return 1.0;
    const double u = (t - t0) / (t1 - t0);
    return u * u * (3.0 - 2.0 * u);
}

}  // namespace twr

#endif  // TWR_COMMON_HPP
