#include "lpmode/pipeline.hpp"

#include "lpmode/errors.hpp"

namespace lpmode {

PipelineFit fit_pipeline(const std::vector<double>& samples,
                         const PipelineConfig& config) {
    validate(config);
    PipelineFit fit;
    fit.reference = fit_reference(samples, config.family, config.fit_method);
    fit.lp = lp_means(samples, fit.reference, config.m_max);
    fit.selection = aic_select(fit.lp, config.selection_rule);

    if (config.estimator != Estimator::MaxEnt)
        fit.l2 = fit_l2(fit.lp, fit.selection);
    if (config.estimator != Estimator::L2) {
        try {
            fit.maxent = fit_maxent(fit.lp, fit.selection, config.quad_nodes);
        } catch (const Error& err) {
            if (err.code() != "NonConvergence" ||
                config.estimator == Estimator::MaxEnt)
                throw;
            fit.maxent_error = err.what();
        }
    }
    return fit;
}

ModeAnalysis analyze_modes(const ReferenceModel& reference,
                           const ComparisonDensity& cd,
                           const PipelineConfig& config) {
    ModeAnalysis out;
    out.u_modes = modes_of_cd(cd, config.grid, config.refine_tol);
    SkewGDensity sk{reference, cd};
    out.x_modes =
        modes_of_f(sk, config.grid, config.tail_delta, config.refine_tol);
    out.reconciled = reconcile_modes(out.u_modes, out.x_modes);
    return out;
}

} // namespace lpmode
