#include "lpmode/lp_basis.hpp"

#include <cmath>

#include "lpmode/errors.hpp"

namespace lpmode {

double legendre_p(int j, double s) {
    if (j < 0)
        fail("DomainError", "legendre_p: order must be >= 0");
    if (j == 0)
        return 1.0;
    double p0 = 1.0, p1 = s;
    for (int k = 2; k <= j; ++k) {
        double p2 = ((2.0 * k - 1.0) * s * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double shifted_legendre(int j, double u) {
    if (j < 0)
        fail("DomainError", "shifted_legendre: order must be >= 0");
    if (!(u >= 0.0 && u <= 1.0))
        fail("DomainError", "shifted_legendre: u must lie in [0,1]");
    return std::sqrt(2.0 * j + 1.0) * legendre_p(j, 2.0 * u - 1.0);
}

void shifted_legendre_all(int m, double u, double* out) {
    if (m < 0)
        fail("DomainError", "shifted_legendre_all: order must be >= 0");
    if (!(u >= 0.0 && u <= 1.0))
        fail("DomainError", "shifted_legendre_all: u must lie in [0,1]");
    const double s = 2.0 * u - 1.0;
    double p0 = 1.0;
    out[0] = 1.0;
    if (m == 0)
        return;
    double p1 = s;
    out[1] = std::sqrt(3.0) * p1;
    for (int k = 2; k <= m; ++k) {
        double p2 = ((2.0 * k - 1.0) * s * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
        out[k] = std::sqrt(2.0 * k + 1.0) * p2;
    }
}

double lp_score(int j, double x, const ReferenceModel& model) {
    if (j < 1)
        fail("DomainError", "lp_score: order must be >= 1");
    return shifted_legendre(j, ref_cdf(model, x));
}

LPCoefficients lp_means(const std::vector<double>& samples,
                        const ReferenceModel& model, int m_max) {
    if (samples.empty())
        fail("EmptyInput", "lp_means: no samples");
    if (m_max < 1)
        fail("DomainError", "lp_means: m_max must be >= 1");

    LPCoefficients lp;
    lp.n = samples.size();
    lp.m_max = m_max;
    lp.values.assign(m_max, 0.0);
    std::vector<double> basis(m_max + 1);
    for (double x : samples) {
        shifted_legendre_all(m_max, ref_cdf(model, x), basis.data());
        for (int j = 1; j <= m_max; ++j)
            lp.values[j - 1] += basis[j];
    }
    for (auto& v : lp.values)
        v /= static_cast<double>(lp.n);
    return lp;
}

double cd_kernel(int m, double u, double v) {
    if (m < 1)
        fail("DomainError", "cd_kernel: order must be >= 1");
    if (!(u > 0.0 && u < 1.0) || !(v > 0.0 && v < 1.0))
        fail("DomainError", "cd_kernel: arguments must lie strictly inside (0,1)");

    if (std::abs(u - v) <= 1e-6) {
        double su = 2.0 * u - 1.0, sv = 2.0 * v - 1.0;
        double sum = 0.0;
        for (int j = 1; j <= m; ++j)
            sum += (2.0 * j + 1.0) * legendre_p(j, su) * legendre_p(j, sv);
        return sum;
    }
    double su = 2.0 * u - 1.0, sv = 2.0 * v - 1.0;
    double num = legendre_p(m + 1, su) * legendre_p(m, sv) -
                 legendre_p(m, su) * legendre_p(m + 1, sv);
    return 0.5 * (m + 1.0) * num / (u - v) - 1.0;
}

} // namespace lpmode
