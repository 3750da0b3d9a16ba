#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lpmode/config.hpp"
#include "lpmode/skew_g.hpp"

namespace lpmode {

// One full single-variable fit: reference, LP means, selection, and the
// estimator(s) requested by the config. Under Estimator::Both a MaxEnt
// solver failure is captured in maxent_error instead of thrown, leaving the
// L2 fit as the fallback; under Estimator::MaxEnt it propagates.
struct PipelineFit {
    ReferenceModel reference;
    LPCoefficients lp;
    SelectionResult selection;
    std::optional<ComparisonDensity> l2;
    std::optional<ComparisonDensity> maxent;
    std::string maxent_error;
};

PipelineFit fit_pipeline(const std::vector<double>& samples,
                         const PipelineConfig& config);

struct ModeAnalysis {
    ModeSet u_modes;     // modes of the comparison density
    ModeSet x_modes;     // modes of the composed density
    ModeSet reconciled;  // after the duality step
};

ModeAnalysis analyze_modes(const ReferenceModel& reference,
                           const ComparisonDensity& cd,
                           const PipelineConfig& config);

} // namespace lpmode
