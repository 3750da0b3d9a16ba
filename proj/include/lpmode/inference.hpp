#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpmode/config.hpp"
#include "lpmode/skew_g.hpp"

namespace lpmode {

struct SampleStats {
    std::vector<double> draws;
    double acceptance_rate = 0.0;
    double envelope = 0.0; // M, the inflated maximum of d
};

// Accept-reject draws from f: proposals Y ~ G by inverse transform, accepted
// when U * M < d(G(Y)) with M = 1.001 * max of d over a 4097-point grid.
// Negative L2 values never accept. Deterministic per seed. Throws
// AcceptanceStall when the expected acceptance rate 1/M drops below 1e-3.
SampleStats sample_skewg_stats(const SkewGDensity& sk, std::size_t n,
                               std::uint64_t seed);
std::vector<double> sample_skewg(const SkewGDensity& sk, std::size_t n,
                                 std::uint64_t seed);

// Assigns replicate modes to anchor modes. Equal counts match in sorted
// order; otherwise greedy nearest-neighbor without reuse, distance ties
// broken to the lower-index anchor and then the lower replicate value.
// Unmatched anchors come back as NaN.
std::vector<double> match_modes(const std::vector<double>& replicate,
                                const std::vector<double>& anchor);

struct ModeInferenceReport {
    CdKind kind = CdKind::MaxEnt;
    std::vector<double> point_modes;
    std::vector<double> se;
    std::vector<std::pair<double, double>> ci;
    int B = 0;
    double match_rate = 0.0; // replicates whose mode count equals the anchor's
    double level = 0.95;
};

// Smoothed-bootstrap mode uncertainty: fit on the data, then for b = 1..B
// draw n points from the fitted density (seed + b), refit the entire
// pipeline on the replicate, reconcile, and match to the anchor modes.
// SEs are the SDs of matched positions, CIs their percentile intervals.
// config.estimator picks the bootstrapped fit; Both means MaxEnt with the
// L2 fit as fallback when the MaxEnt solve fails on the original data.
// Throws TooFewMatches when an anchor matches in under 20% of replicates.
ModeInferenceReport bootstrap_modes(const std::vector<double>& samples,
                                    const PipelineConfig& config, int B,
                                    double level, std::uint64_t seed,
                                    int workers = 1);

nlohmann::json inference_to_json(const ModeInferenceReport& report);

} // namespace lpmode
