#include "lpmode/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include <nlohmann/json.hpp>

#include "lpmode/errors.hpp"
#include "lpmode/parallel.hpp"
#include "lpmode/pipeline.hpp"
#include "lpmode/rng.hpp"

namespace lpmode {

namespace {

constexpr double nan_marker = std::numeric_limits<double>::quiet_NaN();

double envelope_max(const ComparisonDensity& cd) {
    const int grid = 4097;
    double dmax = 0.0;
    for (int i = 0; i < grid; ++i)
        dmax = std::max(dmax, eval_cd(cd, static_cast<double>(i) / (grid - 1)));
    return 1.001 * dmax;
}

} // namespace

SampleStats sample_skewg_stats(const SkewGDensity& sk, std::size_t n,
                               std::uint64_t seed) {
    if (n < 1)
        fail("DomainError", "sample_skewg: n must be >= 1");
    SampleStats out;
    out.envelope = envelope_max(sk.cd);
    if (!(out.envelope > 0.0) || 1.0 / out.envelope < 1e-3)
        fail("AcceptanceStall",
             "sample_skewg: expected acceptance rate below 1e-3");

    Rng rng(seed);
    out.draws.reserve(n);
    std::size_t proposals = 0;
    const std::size_t proposal_cap = 1000000 + n * 100000;
    while (out.draws.size() < n) {
        if (++proposals > proposal_cap)
            fail("AcceptanceStall", "sample_skewg: acceptance stalled");
        double u = rng.u01();
        double accept = rng.u01();
        double d = eval_cd(sk.cd, u);
        if (d > 0.0 && accept * out.envelope < d)
            out.draws.push_back(ref_quantile(sk.reference, u));
    }
    out.acceptance_rate = static_cast<double>(n) / proposals;
    return out;
}

std::vector<double> sample_skewg(const SkewGDensity& sk, std::size_t n,
                                 std::uint64_t seed) {
    return sample_skewg_stats(sk, n, seed).draws;
}

std::vector<double> match_modes(const std::vector<double>& replicate,
                                const std::vector<double>& anchor) {
    if (anchor.empty())
        fail("DomainError", "match_modes: anchor must be nonempty");
    std::vector<double> out(anchor.size(), nan_marker);

    if (replicate.size() == anchor.size()) {
        std::vector<std::size_t> aidx(anchor.size());
        for (std::size_t i = 0; i < aidx.size(); ++i)
            aidx[i] = i;
        std::sort(aidx.begin(), aidx.end(),
                  [&](std::size_t a, std::size_t b) { return anchor[a] < anchor[b]; });
        std::vector<double> rep = replicate;
        std::sort(rep.begin(), rep.end());
        for (std::size_t i = 0; i < rep.size(); ++i)
            out[aidx[i]] = rep[i];
        return out;
    }

    // (distance, anchor index, replicate value) lexicographic greedy match.
    struct Pair {
        double dist;
        std::size_t a;
        std::size_t r;
        double rv;
    };
    std::vector<Pair> pairs;
    pairs.reserve(replicate.size() * anchor.size());
    for (std::size_t a = 0; a < anchor.size(); ++a)
        for (std::size_t r = 0; r < replicate.size(); ++r)
            pairs.push_back({std::abs(replicate[r] - anchor[a]), a, r, replicate[r]});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
        return std::tie(x.dist, x.a, x.rv) < std::tie(y.dist, y.a, y.rv);
    });
    std::vector<bool> a_used(anchor.size(), false), r_used(replicate.size(), false);
    for (const auto& p : pairs) {
        if (a_used[p.a] || r_used[p.r])
            continue;
        a_used[p.a] = true;
        r_used[p.r] = true;
        out[p.a] = replicate[p.r];
    }
    return out;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
    if (sorted.empty())
        return nan_marker;
    if (sorted.size() == 1)
        return sorted[0];
    double h = p * (sorted.size() - 1);
    std::size_t i = static_cast<std::size_t>(h);
    if (i >= sorted.size() - 1)
        return sorted.back();
    return sorted[i] + (h - i) * (sorted[i + 1] - sorted[i]);
}

} // namespace

ModeInferenceReport bootstrap_modes(const std::vector<double>& samples,
                                    const PipelineConfig& config, int B,
                                    double level, std::uint64_t seed,
                                    int workers) {
    if (B < 50)
        fail("DomainError", "bootstrap_modes: B must be >= 50");
    if (!(level > 0.0 && level < 1.0))
        fail("DomainError", "bootstrap_modes: level must lie in (0,1)");

    PipelineFit fit = fit_pipeline(samples, config);
    ModeInferenceReport report;
    report.B = B;
    report.level = level;

    const ComparisonDensity* cd = nullptr;
    if (config.estimator == Estimator::L2) {
        cd = &*fit.l2;
        report.kind = CdKind::L2;
    } else if (fit.maxent) {
        cd = &*fit.maxent;
        report.kind = CdKind::MaxEnt;
    } else {
        cd = &*fit.l2;
        report.kind = CdKind::L2;
    }

    ModeAnalysis anchor = analyze_modes(fit.reference, *cd, config);
    report.point_modes = anchor.reconciled.locations;
    const std::size_t k = report.point_modes.size();

    PipelineConfig replicate_config = config;
    replicate_config.estimator =
        report.kind == CdKind::L2 ? Estimator::L2 : Estimator::MaxEnt;

    SkewGDensity original{fit.reference, *cd};
    std::vector<std::vector<double>> matched(B);
    std::vector<char> count_equal(B, 0);

    parallel_for(B, workers, [&](std::size_t b) {
        matched[b].assign(k, nan_marker);
        try {
            std::uint64_t seed_b = seed + static_cast<std::uint64_t>(b) + 1;
            auto draws = sample_skewg(original, samples.size(), seed_b);
            PipelineFit refit = fit_pipeline(draws, replicate_config);
            const ComparisonDensity& rcd = replicate_config.estimator == Estimator::L2
                                               ? *refit.l2
                                               : *refit.maxent;
            ModeAnalysis rep = analyze_modes(refit.reference, rcd, replicate_config);
            count_equal[b] = rep.reconciled.locations.size() == k;
            if (k > 0)
                matched[b] = match_modes(rep.reconciled.locations, report.point_modes);
        } catch (const Error&) {
            // replicate failures stay unmatched and count against match_rate
        }
    });

    int equal = 0;
    for (char c : count_equal)
        equal += c;
    report.match_rate = static_cast<double>(equal) / B;

    report.se.assign(k, 0.0);
    report.ci.assign(k, {0.0, 0.0});
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> values;
        values.reserve(B);
        for (int b = 0; b < B; ++b)
            if (!std::isnan(matched[b][i]))
                values.push_back(matched[b][i]);
        if (static_cast<double>(values.size()) < 0.2 * B)
            fail("TooFewMatches",
                 "bootstrap_modes: an anchor mode matched in under 20% of replicates");
        std::sort(values.begin(), values.end());
        double mean = 0.0;
        for (double v : values)
            mean += v;
        mean /= values.size();
        double ss = 0.0;
        for (double v : values)
            ss += (v - mean) * (v - mean);
        report.se[i] =
            values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
        double alpha = 0.5 * (1.0 - level);
        report.ci[i] = {percentile(values, alpha), percentile(values, 1.0 - alpha)};
    }
    return report;
}

nlohmann::json inference_to_json(const ModeInferenceReport& report) {
    nlohmann::json j;
    j["kind"] = cd_kind_name(report.kind);
    j["modes"] = report.point_modes;
    j["se"] = report.se;
    auto ci = nlohmann::json::array();
    for (const auto& [lo, hi] : report.ci)
        ci.push_back({lo, hi});
    j["ci"] = ci;
    j["B"] = report.B;
    j["match_rate"] = report.match_rate;
    j["level"] = report.level;
    return j;
}

} // namespace lpmode
