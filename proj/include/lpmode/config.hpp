#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpmode/comparison_density.hpp"
#include "lpmode/reference_model.hpp"

namespace lpmode {

enum class Estimator { L2, MaxEnt, Both };

std::string estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);
std::string selection_rule_name(SelectionRule rule);
SelectionRule selection_rule_from_name(const std::string& name);

// Every tunable of the pipeline in one immutable-after-validation object;
// a config plus its seed fully determines all outputs.
struct PipelineConfig {
    Family family = Family::Normal;
    FitMethod fit_method = FitMethod::MLE;
    int m_max = 8;                       // 1..20
    SelectionRule selection_rule = SelectionRule::AIC;
    Estimator estimator = Estimator::Both;
    int grid = 1000;                     // >= 100
    double refine_tol = 1e-6;            // fraction of the search range
    int quad_nodes = 128;                // >= 64
    int B = 500;                         // >= 50
    double ci_level = 0.95;              // (0,1)
    std::uint64_t seed = 0;
    double tail_delta = 1e-4;            // (0, 0.1]
};

// Every violated bound, not just the first.
std::vector<std::string> validate_errors(const PipelineConfig& config);

// Throws ValidationError listing all violations.
void validate(const PipelineConfig& config);

nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const nlohmann::json& j);

} // namespace lpmode
