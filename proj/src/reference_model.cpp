#include "lpmode/reference_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lpmode/errors.hpp"
#include "lpmode/math.hpp"
#include "lpmode/rng.hpp"

namespace lpmode {

namespace {

void check_valid(const ReferenceModel& model) {
    switch (model.family) {
    case Family::Normal:
        if (model.params.size() != 2)
            fail("DomainError", "normal model needs params {mu, sigma}");
        if (!(model.params[1] > 0.0))
            fail("DomainError", "normal model needs sigma > 0");
        return;
    case Family::Exponential:
        if (model.params.size() != 1)
            fail("DomainError", "exponential model needs params {beta}");
        if (!(model.params[0] > 0.0))
            fail("DomainError", "exponential model needs beta > 0");
        return;
    }
    fail("DomainError", "unknown family");
}

} // namespace

std::string family_name(Family family) {
    return family == Family::Normal ? "normal" : "exponential";
}

Family family_from_name(const std::string& name) {
    if (name == "normal")
        return Family::Normal;
    if (name == "exponential")
        return Family::Exponential;
    fail("DomainError", "unknown family '" + name + "'");
}

std::string fit_method_name(FitMethod method) {
    switch (method) {
    case FitMethod::MLE:
        return "mle";
    case FitMethod::Moments:
        return "moments";
    case FitMethod::Fixed:
        return "fixed";
    }
    return "mle";
}

FitMethod fit_method_from_name(const std::string& name) {
    if (name == "mle")
        return FitMethod::MLE;
    if (name == "moments")
        return FitMethod::Moments;
    if (name == "fixed")
        return FitMethod::Fixed;
    fail("DomainError", "unknown fit method '" + name + "'");
}

ReferenceModel make_reference(Family family, std::vector<double> params) {
    ReferenceModel model{family, std::move(params), FitMethod::Fixed};
    check_valid(model);
    return model;
}

ReferenceModel fit_reference(const std::vector<double>& samples, Family family,
                             FitMethod method,
                             const std::vector<double>& fixed_params) {
    if (method == FitMethod::Fixed) {
        if (fixed_params.empty())
            fail("DomainError", "Fixed fit requires explicit params");
        ReferenceModel model{family, fixed_params, FitMethod::Fixed};
        check_valid(model);
        return model;
    }
    if (samples.empty())
        fail("EmptyInput", "fit_reference: no samples");

    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;

    if (family == Family::Exponential) {
        for (double x : samples)
            if (x < 0.0)
                fail("NegativeSampleForExponential",
                     "fit_reference: exponential family requires nonnegative samples");
        if (!(mean > 0.0))
            fail("DegenerateSample", "fit_reference: exponential mean is zero");
        return ReferenceModel{family, {mean}, method};
    }

    if (samples.size() < 2)
        fail("DegenerateSample", "fit_reference: normal fit needs n >= 2");
    double ss = 0.0;
    for (double x : samples)
        ss += (x - mean) * (x - mean);
    double sigma = std::sqrt(ss / n);
    if (!(sigma > 0.0))
        fail("DegenerateSample", "fit_reference: zero variance");
    return ReferenceModel{family, {mean, sigma}, method};
}

double ref_pdf(const ReferenceModel& model, double x) {
    check_valid(model);
    if (model.family == Family::Normal) {
        double z = (x - model.params[0]) / model.params[1];
        return math::norm_pdf(z) / model.params[1];
    }
    if (x < 0.0)
        return 0.0;
    double beta = model.params[0];
    return std::exp(-x / beta) / beta;
}

double ref_cdf(const ReferenceModel& model, double x) {
    check_valid(model);
    if (model.family == Family::Normal)
        return math::norm_cdf((x - model.params[0]) / model.params[1]);
    if (x < 0.0)
        return 0.0;
    return -std::expm1(-x / model.params[0]);
}

double ref_quantile(const ReferenceModel& model, double u) {
    check_valid(model);
    if (!(u > 0.0 && u < 1.0))
        fail("DomainError", "ref_quantile: u must lie strictly inside (0,1)");
    if (model.family == Family::Normal)
        return model.params[0] + model.params[1] * math::norm_quantile(u);
    return -model.params[0] * std::log1p(-u);
}

std::vector<double> ref_sample(const ReferenceModel& model, std::size_t n,
                               std::uint64_t seed) {
    check_valid(model);
    if (n < 1)
        fail("DomainError", "ref_sample: n must be >= 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out)
        x = ref_quantile(model, rng.u01());
    return out;
}

nlohmann::json reference_to_json(const ReferenceModel& model) {
    nlohmann::json j;
    j["family"] = family_name(model.family);
    j["fit_method"] = fit_method_name(model.fit_method);
    if (model.family == Family::Normal)
        j["params"] = {{"mu", model.params[0]}, {"sigma", model.params[1]}};
    else
        j["params"] = {{"beta", model.params[0]}};
    return j;
}

ReferenceModel reference_from_json(const nlohmann::json& j) {
    ReferenceModel model;
    model.family = family_from_name(j.at("family").get<std::string>());
    if (j.contains("fit_method"))
        model.fit_method = fit_method_from_name(j.at("fit_method").get<std::string>());
    const auto& p = j.at("params");
    if (model.family == Family::Normal)
        model.params = {p.at("mu").get<double>(), p.at("sigma").get<double>()};
    else
        model.params = {p.at("beta").get<double>()};
    check_valid(model);
    return model;
}

} // namespace lpmode
