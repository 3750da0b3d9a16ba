#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace lpmode {

enum class Family { Normal, Exponential };
enum class FitMethod { MLE, Moments, Fixed };

// The unimodal parametric baseline G. Immutable once constructed; evaluation
// is reentrant and sampling takes an explicit seed, so instances can be
// shared freely across workers.
struct ReferenceModel {
    Family family = Family::Normal;
    std::vector<double> params; // Normal: {mu, sigma}; Exponential: {beta}
    FitMethod fit_method = FitMethod::Fixed;
};

std::string family_name(Family family);
Family family_from_name(const std::string& name);
std::string fit_method_name(FitMethod method);
FitMethod fit_method_from_name(const std::string& name);

// Construct a model from caller-supplied parameters (fit_method = Fixed).
ReferenceModel make_reference(Family family, std::vector<double> params);

// Closed-form fits. Normal MLE uses the 1/n variance estimator; for these
// two families the method-of-moments estimates coincide with the MLEs.
// Fixed requires explicit params and ignores the samples.
ReferenceModel fit_reference(const std::vector<double>& samples, Family family,
                             FitMethod method,
                             const std::vector<double>& fixed_params = {});

double ref_pdf(const ReferenceModel& model, double x);
double ref_cdf(const ReferenceModel& model, double x);
double ref_quantile(const ReferenceModel& model, double u);

// Inverse-transform sampling through ref_quantile, so G(sample) reproduces
// the exact uniform stream.
std::vector<double> ref_sample(const ReferenceModel& model, std::size_t n,
                               std::uint64_t seed);

nlohmann::json reference_to_json(const ReferenceModel& model);
ReferenceModel reference_from_json(const nlohmann::json& j);

} // namespace lpmode
