#pragma once

#include <cmath>

namespace lpmode::math {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;

inline double norm_pdf(double z) {
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double norm_cdf(double z) {
    return 0.5 * std::erfc(-z / sqrt2);
}

// Inverse standard normal CDF. Rational approximation (Acklam) good to
// ~1e-9, then one Newton step against erfc-based norm_cdf tightens it to
// near machine precision.
double norm_quantile(double p);

} // namespace lpmode::math
