#include "lpmode/config.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "lpmode/errors.hpp"

namespace lpmode {

std::string estimator_name(Estimator e) {
    switch (e) {
    case Estimator::L2:
        return "l2";
    case Estimator::MaxEnt:
        return "maxent";
    case Estimator::Both:
        return "both";
    }
    return "both";
}

Estimator estimator_from_name(const std::string& name) {
    if (name == "l2")
        return Estimator::L2;
    if (name == "maxent")
        return Estimator::MaxEnt;
    if (name == "both")
        return Estimator::Both;
    fail("DomainError", "unknown estimator '" + name + "'");
}

std::string selection_rule_name(SelectionRule rule) {
    return rule == SelectionRule::AIC ? "aic" : "bic";
}

SelectionRule selection_rule_from_name(const std::string& name) {
    if (name == "aic")
        return SelectionRule::AIC;
    if (name == "bic")
        return SelectionRule::BIC;
    fail("DomainError", "unknown selection rule '" + name + "'");
}

std::vector<std::string> validate_errors(const PipelineConfig& config) {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok)
            errors.push_back(msg);
    };
    check(config.m_max >= 1 && config.m_max <= 20, "m_max must lie in [1, 20]");
    check(config.grid >= 100, "grid must be >= 100");
    check(config.refine_tol > 0.0 && config.refine_tol <= 1e-2,
          "refine_tol must lie in (0, 1e-2]");
    check(config.quad_nodes >= 64, "quad_nodes must be >= 64");
    check(config.B >= 50, "B must be >= 50");
    check(config.ci_level > 0.0 && config.ci_level < 1.0,
          "ci_level must lie in (0, 1)");
    check(config.tail_delta > 0.0 && config.tail_delta <= 0.1,
          "tail_delta must lie in (0, 0.1]");
    return errors;
}

void validate(const PipelineConfig& config) {
    auto errors = validate_errors(config);
    if (errors.empty())
        return;
    std::ostringstream msg;
    msg << "invalid configuration:";
    for (const auto& e : errors)
        msg << " [" << e << "]";
    fail("ValidationError", msg.str());
}

nlohmann::json config_to_json(const PipelineConfig& config) {
    nlohmann::json j;
    j["family"] = family_name(config.family);
    j["fit_method"] = fit_method_name(config.fit_method);
    j["m_max"] = config.m_max;
    j["selection_rule"] = selection_rule_name(config.selection_rule);
    j["estimator"] = estimator_name(config.estimator);
    j["grid"] = config.grid;
    j["refine_tol"] = config.refine_tol;
    j["quad_nodes"] = config.quad_nodes;
    j["B"] = config.B;
    j["ci_level"] = config.ci_level;
    j["seed"] = config.seed;
    j["tail_delta"] = config.tail_delta;
    return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig config;
    if (j.contains("family"))
        config.family = family_from_name(j.at("family").get<std::string>());
    if (j.contains("fit_method"))
        config.fit_method =
            fit_method_from_name(j.at("fit_method").get<std::string>());
    config.m_max = j.value("m_max", config.m_max);
    if (j.contains("selection_rule"))
        config.selection_rule =
            selection_rule_from_name(j.at("selection_rule").get<std::string>());
    if (j.contains("estimator"))
        config.estimator =
            estimator_from_name(j.at("estimator").get<std::string>());
    config.grid = j.value("grid", config.grid);
    config.refine_tol = j.value("refine_tol", config.refine_tol);
    config.quad_nodes = j.value("quad_nodes", config.quad_nodes);
    config.B = j.value("B", config.B);
    config.ci_level = j.value("ci_level", config.ci_level);
    config.seed = j.value("seed", config.seed);
    config.tail_delta = j.value("tail_delta", config.tail_delta);
    return config;
}

} // namespace lpmode
