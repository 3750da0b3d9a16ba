#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpmode/lp_basis.hpp"

namespace lpmode {

enum class SelectionRule { AIC, BIC };

// Outcome of the adaptive filtering step. selected_indices are the first
// k_selected entries of order_by_magnitude; aic_trace[k] is the criterion
// value of the top-k model, with aic_trace[0] = 0 for the empty model.
struct SelectionResult {
    std::vector<int> order_by_magnitude;
    int k_selected = 0;
    std::vector<int> selected_indices;
    std::vector<double> aic_trace;
};

// Sorts LP means by decreasing magnitude (ties to the smaller index) and
// keeps the smallest k maximizing Σ(first k squares) - penalty(k), with
// penalty 2k/n for AIC and (log n)k/n for BIC.
SelectionResult aic_select(const LPCoefficients& coeffs,
                           SelectionRule rule = SelectionRule::AIC);

enum class CdKind { L2, MaxEnt };

std::string cd_kind_name(CdKind kind);

// Fitted comparison density on [0,1].
//   L2:     d(u) = 1 + Σ_{j∈indices} coeffs_j Leg_j(u)   (may go negative)
//   MaxEnt: d(u) = exp(theta0 + Σ_{j∈indices} coeffs_j Leg_j(u))
// Empty indices mean d ≡ 1 for both kinds.
struct ComparisonDensity {
    CdKind kind = CdKind::L2;
    std::vector<int> indices; // ascending
    std::vector<double> coeffs;
    double theta0 = 0.0;
    int quad_nodes = 128;
};

ComparisonDensity fit_l2(const LPCoefficients& coeffs, const SelectionResult& sel);

// Solves the convex dual Ψ(θ) = log ∫ exp(Σ θ_j Leg_j) - Σ θ_j LP_j by
// Newton's method with backtracking line search; Gauss-Legendre quadrature
// with quad_nodes nodes for all integrals. At the solution every moment
// residual |∫ d Leg_j - LP_j| is below 1e-8. Throws NonConvergence (with the
// final gradient norm in the message) after 200 iterations.
ComparisonDensity fit_maxent(const LPCoefficients& coeffs,
                             const SelectionResult& sel, int quad_nodes = 128);

double eval_cd(const ComparisonDensity& cd, double u);

// Cumulative D(u) = ∫_0^u d. L2 uses the closed-form antiderivative, pushed
// onto its running-max envelope (clamped to [0,1]) so the result is monotone
// even where the raw series dips negative; MaxEnt uses adaptive quadrature.
double cd_distribution(const ComparisonDensity& cd, double u);

nlohmann::json cd_to_json(const ComparisonDensity& cd);
ComparisonDensity cd_from_json(const nlohmann::json& j);

} // namespace lpmode
