#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpmode/config.hpp"

namespace lpmode {

// Synthetic benchmark distribution. true_mode_count is pinned by a grid
// scan of the analytic density over [lo, hi] (boundary maxima included),
// which also fixes the variance-vs-sd and rate-vs-scale readings recorded
// in description.
struct ScenarioSpec {
    std::string id;
    int true_mode_count = 1;
    std::string description;
    double lo = 0.0, hi = 1.0; // evaluation window for the analytic density
};

const std::vector<ScenarioSpec>& scenarios();
const ScenarioSpec& scenario(const std::string& id);

std::vector<double> sample_scenario(const ScenarioSpec& spec, std::size_t n,
                                    std::uint64_t seed);

double scenario_density(const ScenarioSpec& spec, double x);

// Reference family the pipeline uses per scenario: Exponential for the
// nonnegative skewed scenarios (D2, D7), Normal otherwise.
Family scenario_family(const std::string& id);

// Maxima of fn on a uniform grid; counts interior strict maxima plus
// endpoints exceeding their single neighbor.
int count_grid_modes(const std::function<double(double)>& fn, double lo,
                     double hi, int grid);

// Gaussian KDE with h = 0.9 min(sd, IQR/1.34) n^{-1/5} on a 2048-point grid
// spanning [min-3h, max+3h]; strict interior maxima. Constant samples raise
// DegenerateSample; zero IQR alone falls back to the sd.
int silverman_kde_modes(const std::vector<double>& samples);

struct GmmFit {
    std::vector<double> weights, means, sds;
    double loglik = 0.0;
    std::vector<double> loglik_trace; // best restart, one entry per iteration
};

// Best of `restarts` EM runs from k-means++-style seeds; variance floored at
// 1e-6 times the sample variance, tolerance 1e-8 on the log-likelihood,
// at most 500 iterations.
GmmFit gmm_fit(const std::vector<double>& samples, int k, int restarts,
               std::uint64_t seed);

double gmm_density(const GmmFit& fit, double x);

// Fits k = 1..k_max, picks k by BIC with p = 3k-1 parameters, and counts the
// modes of the fitted mixture density (components are not modes).
int gmm_bic_modes(const std::vector<double>& samples, int k_max = 9,
                  std::uint64_t seed = 0);

struct LpModeCounts {
    std::optional<int> l2;     // empty when that fit failed
    std::optional<int> maxent;
};

// Reconciled mode count per estimator from one pipeline fit.
LpModeCounts lpmode_modes(const std::vector<double>& samples,
                          const PipelineConfig& config);

enum class BenchMethod { Silverman, GMM, LP_L2, LP_MaxEnt };

std::string bench_method_name(BenchMethod method);
BenchMethod bench_method_from_name(const std::string& name);

struct BenchRow {
    std::string scenario;
    std::size_t n = 0;
    std::string method;
    double success_pct = 0.0;   // replicates reporting the true mode count
    double mc_se = 0.0;         // binomial SE of success_pct
    double mode_count_sd = 0.0; // over non-failed replicates
    int replications = 0;
    int failures = 0;
    std::map<int, int> tallies; // mode count -> replicates
};

struct BenchTable {
    std::vector<BenchRow> rows;
    std::uint64_t seed = 0;
};

// Monte-Carlo success table. Replicate r of a (scenario, n) cell draws its
// data from a seed derived from (seed, scenario, n, r), so every method
// sees the same data and cells are independent of each other and of the
// worker count. Per-replicate pipeline failures count as incorrect.
BenchTable run_mode_benchmark(const std::vector<std::string>& scenario_ids,
                      const std::vector<std::size_t>& sizes, int R,
                      std::uint64_t seed,
                      const std::vector<BenchMethod>& methods,
                      int workers = 1);

nlohmann::json bench_to_json(const BenchTable& table);
std::string bench_csv(const BenchTable& table);

} // namespace lpmode
