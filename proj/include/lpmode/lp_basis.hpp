#pragma once

#include <cstddef>
#include <vector>

#include "lpmode/reference_model.hpp"

namespace lpmode {

// Sample LP means: values[j-1] is the mean of Leg_j(G(x_i)) for j = 1..m_max.
struct LPCoefficients {
    std::vector<double> values;
    std::size_t n = 0;
    int m_max = 0;
};

// Legendre polynomial P_j on [-1,1] by the three-term recurrence.
double legendre_p(int j, double s);

// Orthonormal shifted Legendre polynomial on [0,1]:
// Leg_j(u) = sqrt(2j+1) * P_j(2u-1), so ∫ Leg_j Leg_k = δ_jk and Leg_0 ≡ 1.
double shifted_legendre(int j, double u);

// Leg_0(u)..Leg_m(u) in one recurrence pass; out must hold m+1 doubles.
void shifted_legendre_all(int m, double u, double* out);

// Score function T_j(x;G) = Leg_j(G(x)).
double lp_score(int j, double x, const ReferenceModel& model);

LPCoefficients lp_means(const std::vector<double>& samples,
                        const ReferenceModel& model, int m_max);

// Σ_{j=1}^{m} Leg_j(u) Leg_j(v). Uses the Christoffel-Darboux closed form
//   (m+1)/2 * (P_{m+1}(s)P_m(t) - P_m(s)P_{m+1}(t)) / (u - v),
// s = 2u-1, t = 2v-1, which evaluates the j >= 0 sum; the constant j = 0
// term (≡ 1) is subtracted. Near the u = v diagonal the closed form is 0/0
// and the direct sum is used instead.
double cd_kernel(int m, double u, double v);

} // namespace lpmode
