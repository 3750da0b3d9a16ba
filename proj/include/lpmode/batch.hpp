#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpmode/config.hpp"

namespace lpmode {

struct VariableResult {
    std::string name;
    std::size_t n = 0;
    int mode_count = 0;
    std::vector<double> modes;
    std::string estimator_used; // "l2" or "maxent"; empty on failure
    std::vector<int> selection; // ascending
    std::string error; // empty, or FitFailure / NonConvergence / SkippedSmallSample
    double gini = 0.0;
};

struct BatchReport {
    std::vector<VariableResult> results; // input order
    std::map<int, int> modality_histogram; // over non-failed variables
    PipelineConfig config_echo;
};

using NamedColumns = std::vector<std::pair<std::string, std::vector<double>>>;

// Runs the pipeline once per variable. Failures are isolated to their
// variable; per-variable seeds derive from the config seed and the variable
// name, so results do not depend on worker count, processing order, or which
// other variables are present. Variables with n < 30 are skipped. Under
// Estimator::Both a MaxEnt solver failure falls back to the L2 fit.
BatchReport run_batch(const NamedColumns& matrix, const PipelineConfig& config,
                      int workers = 1);

// Pearson correlation of the samples with their empirical CDF values
// (mid-rank convention for ties).
double gini(const std::vector<double>& samples);

// Comma-separated matrix with a header row of variable names; blank lines
// ignored; non-numeric cells are errors. transpose reads variables as rows
// (first cell of each row is the name).
NamedColumns read_csv_matrix(std::istream& in, bool transpose);

nlohmann::json batch_to_json(const BatchReport& report);

// name, n, mode_count, modes joined by '|', estimator, error per line.
std::string batch_csv_summary(const BatchReport& report);

} // namespace lpmode
