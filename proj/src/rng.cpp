#include "lpmode/rng.hpp"

#include <cmath>

#include "lpmode/errors.hpp"
#include "lpmode/math.hpp"

namespace lpmode {

double Rng::normal() {
    return math::norm_quantile(u01());
}

double Rng::exponential(double mean) {
    if (mean <= 0.0)
        fail("DomainError", "exponential: mean must be positive");
    return -mean * std::log1p(-u01());
}

double Rng::gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
        fail("DomainError", "gamma: shape and scale must be positive");
    if (shape < 1.0) {
        double u = u01();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0.0)
            continue;
        v = v * v * v;
        double u = u01();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2)
            return scale * d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
            return scale * d * v;
    }
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    std::uint64_t h = 14695981039346656037ull ^ (base * 0x9e3779b97f4a7c15ull);
    for (unsigned char ch : tag) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace lpmode
