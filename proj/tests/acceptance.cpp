// End-to-end acceptance gate. Each check prints one PASS/FAIL line with the
// measured numbers; the process exits nonzero if any check fails. The
// benchmark replications dominate the runtime (roughly twenty minutes on one
// core, almost all of it in the mixture-model baseline cell).

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpmode/batch.hpp"
#include "lpmode/bench.hpp"
#include "lpmode/comparison_density.hpp"
#include "lpmode/errors.hpp"
#include "lpmode/inference.hpp"
#include "lpmode/lp_basis.hpp"
#include "lpmode/pipeline.hpp"
#include "lpmode/quadrature.hpp"
#include "lpmode/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lpmode;

namespace {

int failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << label
              << " (" << detail << ")\n";
    std::cout.flush();
    if (!pass)
        ++failures;
}

std::string fmt(double x, int digits = 1) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << x;
    return ss.str();
}

double cell(const BenchTable& table, const std::string& scenario, std::size_t n,
            const std::string& method) {
    for (const auto& row : table.rows)
        if (row.scenario == scenario && row.n == n && row.method == method)
            return row.success_pct;
    fail("DomainError", "missing benchmark cell");
}

SelectionResult select_all(const std::vector<int>& indices) {
    SelectionResult sel;
    sel.order_by_magnitude = indices;
    sel.k_selected = static_cast<int>(indices.size());
    sel.selected_indices = indices;
    return sel;
}

// ---- criterion 1: benchmark recovery rates ----

void criterion_benchmark() {
    const int R = 500;
    const std::uint64_t seed = 42;
    std::vector<BenchMethod> lp{BenchMethod::LP_L2, BenchMethod::LP_MaxEnt};

    auto t1 = run_mode_benchmark({"D1"}, {250}, R, seed, lp);
    auto t2 = run_mode_benchmark({"D2", "D5"}, {500}, R, seed, lp);
    auto t3 = run_mode_benchmark({"D8"}, {250}, R, seed, lp);
    auto t4 = run_mode_benchmark({"D1"}, {1000}, R, seed, {BenchMethod::Silverman});
    auto t5 = run_mode_benchmark({"D7"}, {1000}, R, seed, {BenchMethod::GMM});

    struct Gate {
        std::string name;
        double value, lo, hi;
    };
    std::vector<Gate> gates = {
        {"D1n250 maxent", cell(t1, "D1", 250, "lp_maxent"), 93.8, 103.8},
        {"D2n500 l2", cell(t2, "D2", 500, "lp_l2"), 91.6, 101.6},
        {"D5n500 maxent", cell(t2, "D5", 500, "lp_maxent"), 94.6, 104.6},
        {"D5n500 l2", cell(t2, "D5", 500, "lp_l2"), 35.0, 60.0},
        {"D8n250 l2", cell(t3, "D8", 250, "lp_l2"), 87.6, 99.6},
        {"D8n250 maxent", cell(t3, "D8", 250, "lp_maxent"), 87.6, 99.6},
        {"D7n1000 gmm", cell(t5, "D7", 1000, "gmm"), 0.0, 5.0},
        {"D1n1000 silverman", cell(t4, "D1", 1000, "silverman"), 47.8, 63.8},
    };

    bool pass = true;
    std::string detail;
    for (const auto& g : gates) {
        bool ok = g.value >= g.lo && g.value <= g.hi;
        pass = pass && ok;
        if (!detail.empty())
            detail += ", ";
        detail += g.name + " " + fmt(g.value) + "% in [" + fmt(g.lo) + "," +
                  fmt(g.hi) + "]" + (ok ? "" : " <-- out of band");
    }
    report(1, "benchmark mode recovery, 500 replications per cell", pass, detail);
}

// ---- criterion 2: frozen single-dataset golden file ----

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_golden() {
    fs::path fixture = fs::path(LPMODE_FIXTURE_DIR) / "enzyme_synth.csv";
    fs::path golden = fs::path(LPMODE_FIXTURE_DIR) / "enzyme_synth_fit.json";
    if (!fs::exists(fixture) || !fs::exists(golden)) {
        report(2, "frozen fit golden file", false, "fixture files missing");
        return;
    }
    fs::path out = fs::temp_directory_path() / "lpmode_acceptance_fit.json";
    std::string cmd = std::string(LPMODE_CLI_PATH) + " fit " + fixture.string() +
                      " --family exponential --seed 1 >" + out.string() +
                      " 2>/dev/null";
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code != 0) {
        report(2, "frozen fit golden file", false, "cli exit code " + std::to_string(code));
        return;
    }
    json fresh = json::parse(slurp(out));
    json frozen = json::parse(slurp(golden));
    bool equal = fresh == frozen;

    std::string detail = "cli output vs " + golden.filename().string() + ": " +
                         (equal ? "identical" : "DIFFERS");
    detail += "; reference beta " + fmt(fresh["reference"]["params"]["beta"].get<double>(), 4);
    detail += ", selected {";
    bool first = true;
    for (const auto& j : fresh["selection"]["indices"]) {
        detail += (first ? "" : ",") + std::to_string(j.get<int>());
        first = false;
    }
    detail += "}";
    report(2, "frozen fit golden file", equal, detail);
}

// ---- criterion 3: null calibration of the score means ----

void criterion_null_calibration() {
    const int reps = 1000;
    bool pass = true;
    double worst_var = 0.0, worst_rho = 0.0;
    for (int family = 0; family < 2; ++family) {
        ReferenceModel g = family == 0 ? make_reference(Family::Normal, {0.0, 1.0})
                                       : make_reference(Family::Exponential, {1.0});
        for (std::size_t n : {std::size_t{250}, std::size_t{1000}}) {
            const int m = 8;
            std::vector<std::vector<double>> lp(reps);
            for (int r = 0; r < reps; ++r) {
                auto tag = std::string("null:") + family_name(g.family) + ":" +
                           std::to_string(n) + ":" + std::to_string(r);
                auto xs = ref_sample(g, n, derive_seed(7, tag));
                lp[r] = lp_means(xs, g, m).values;
            }
            std::vector<double> mean(m, 0.0), var(m, 0.0);
            for (int j = 0; j < m; ++j) {
                for (int r = 0; r < reps; ++r)
                    mean[j] += lp[r][j];
                mean[j] /= reps;
                for (int r = 0; r < reps; ++r)
                    var[j] += (lp[r][j] - mean[j]) * (lp[r][j] - mean[j]);
                var[j] /= reps - 1;
                double ratio = var[j] * static_cast<double>(n);
                worst_var = std::max(worst_var, std::abs(ratio - 1.0));
                pass = pass && std::abs(ratio - 1.0) <= 0.2;
            }
            for (int j = 0; j < m; ++j) {
                for (int k = j + 1; k < m; ++k) {
                    double cov = 0;
                    for (int r = 0; r < reps; ++r)
                        cov += (lp[r][j] - mean[j]) * (lp[r][k] - mean[k]);
                    cov /= reps - 1;
                    double rho = cov / std::sqrt(var[j] * var[k]);
                    worst_rho = std::max(worst_rho, std::abs(rho));
                    pass = pass && std::abs(rho) <= 0.1;
                }
            }
        }
    }
    report(3, "null calibration of score means", pass,
           "worst |n*var - 1| " + fmt(worst_var, 3) + " (limit 0.2), worst |rho| " +
               fmt(worst_rho, 3) + " (limit 0.1); both families, n in {250,1000}, " +
               std::to_string(reps) + " reps");
}

// ---- criterion 4: kernel identity of the full-order linear series ----

void criterion_kernel_identity() {
    Rng rng(123);
    const std::size_t n = 100;
    std::vector<double> xs(n);
    for (double& x : xs)
        x = 0.4 * rng.normal() + 0.1 * rng.gamma(2.0, 1.0);
    auto g = fit_reference(xs, Family::Normal, FitMethod::MLE);

    double worst = 0.0;
    for (int m : {2, 4, 6}) {
        auto lp = lp_means(xs, g, m);
        std::vector<int> all(m);
        for (int j = 1; j <= m; ++j)
            all[j - 1] = j;
        auto cd = fit_l2(lp, select_all(all));
        for (int t = 0; t < 200; ++t) {
            double u = rng.u01();
            double direct = 0.0;
            for (double x : xs)
                direct += cd_kernel(m, u, ref_cdf(g, x));
            direct = 1.0 + direct / static_cast<double>(n);
            worst = std::max(worst, std::abs(eval_cd(cd, u) - direct));
        }
    }
    report(4, "series estimate equals its kernel form", worst <= 1e-10,
           "max |series - kernel| " + fmt(worst * 1e12, 3) + "e-12 (limit 1e-10), m in {2,4,6}, n=100");
}

// ---- criterion 5: basis orthonormality and closed forms ----

void criterion_orthonormality() {
    const QuadRule& rule = gauss_legendre(256);
    double worst = 0.0;
    for (int j = 0; j <= 10; ++j) {
        for (int k = j; k <= 10; ++k) {
            double s = 0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q)
                s += rule.weights[q] * shifted_legendre(j, rule.nodes[q]) *
                     shifted_legendre(k, rule.nodes[q]);
            worst = std::max(worst, std::abs(s - (j == k ? 1.0 : 0.0)));
        }
    }

    Rng rng(5);
    double worst_poly = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double u = rng.u01();
        double u2 = u * u;
        double explicit_forms[4] = {
            std::sqrt(3.0) * (2 * u - 1),
            std::sqrt(5.0) * (6 * u2 - 6 * u + 1),
            std::sqrt(7.0) * (20 * u2 * u - 30 * u2 + 12 * u - 1),
            3.0 * (70 * u2 * u2 - 140 * u2 * u + 90 * u2 - 20 * u + 1)};
        for (int j = 1; j <= 4; ++j)
            worst_poly = std::max(
                worst_poly, std::abs(shifted_legendre(j, u) - explicit_forms[j - 1]));
    }
    bool pass = worst <= 1e-10 && worst_poly <= 1e-12;
    report(5, "basis orthonormality and closed forms", pass,
           "max |<j,k> - delta| " + fmt(worst * 1e12, 3) + "e-12 (limit 1e-10), max closed-form gap " +
               fmt(worst_poly * 1e13, 3) + "e-13 (limit 1e-12)");
}

// ---- criterion 6: exponential-fit moment residuals and 1-D oracle ----

void criterion_maxent() {
    const QuadRule& rule = gauss_legendre(256);
    Rng rng(41);
    double worst_residual = 0.0, worst_norm = 0.0;
    int solved = 0;
    for (int rep = 0; rep < 50; ++rep) {
        int k = 1 + static_cast<int>(rng.u01() * 4);
        std::vector<int> indices;
        while (static_cast<int>(indices.size()) < k) {
            int j = 1 + static_cast<int>(rng.u01() * 8);
            if (std::find(indices.begin(), indices.end(), j) == indices.end())
                indices.push_back(j);
        }
        std::vector<double> values(8, 0.0);
        for (int j : indices)
            values[j - 1] = 0.3 * (rng.u01() - 0.5);
        LPCoefficients lp;
        lp.values = values;
        lp.n = 200;
        lp.m_max = 8;
        auto cd = fit_maxent(lp, select_all(indices));
        ++solved;
        double total = integrate([&](double u) { return eval_cd(cd, u); }, rule);
        worst_norm = std::max(worst_norm, std::abs(total - 1.0));
        for (int j : indices) {
            double moment = integrate(
                [&](double u) { return eval_cd(cd, u) * shifted_legendre(j, u); },
                rule);
            worst_residual = std::max(worst_residual, std::abs(moment - values[j - 1]));
        }
    }

    // single-constraint fits against a bisection solve of the same moment map
    double worst_oracle = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        double target = 0.6 * (rng.u01() - 0.5);
        LPCoefficients lp;
        lp.values = {target};
        lp.n = 100;
        lp.m_max = 1;
        auto cd = fit_maxent(lp, select_all({1}));
        auto mean_at = [&](double theta) {
            double z = 0, m = 0;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                double lg = shifted_legendre(1, rule.nodes[q]);
                double w = rule.weights[q] * std::exp(theta * lg);
                z += w;
                m += w * lg;
            }
            return m / z;
        };
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (mean_at(mid) < target ? lo : hi) = mid;
        }
        worst_oracle = std::max(worst_oracle, std::abs(cd.coeffs[0] - 0.5 * (lo + hi)));
    }

    bool pass = solved == 50 && worst_residual <= 1e-8 && worst_norm <= 1e-8 &&
                worst_oracle <= 1e-8;
    report(6, "exponential-family fit correctness", pass,
           "50/50 solved, max moment residual " + fmt(worst_residual * 1e10, 3) +
               "e-10, max |integral - 1| " + fmt(worst_norm * 1e10, 3) +
               "e-10, bisection gap " + fmt(worst_oracle * 1e10, 3) +
               "e-10 (limits 1e-8)");
}

// ---- criterion 7: accept-reject sampler follows the fitted cumulative ----

void criterion_sampler() {
    const std::size_t n = 1000;
    const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));

    std::vector<SkewGDensity> models;
    {
        ComparisonDensity flat;
        models.push_back({make_reference(Family::Normal, {0.0, 1.0}), flat});

        // bimodal data, exponential-family correction
        Rng rng(61);
        std::vector<double> xs(600);
        for (double& x : xs)
            x = (rng.u01() < 0.5 ? -1.6 : 1.6) + 0.8 * rng.normal();
        PipelineConfig config;
        config.seed = 2;
        auto fit = fit_pipeline(xs, config);
        models.push_back({fit.reference, fit.maxent ? *fit.maxent : *fit.l2});

        // mildly skewed positive data: close enough to exponential that the
        // linear correction stays strictly positive (seed picked for margin)
        Rng gamma_rng(14);
        std::vector<double> ys(600);
        for (double& y : ys)
            y = gamma_rng.gamma(1.5, 0.9);
        PipelineConfig econfig;
        econfig.family = Family::Exponential;
        econfig.seed = 3;
        auto efit = fit_pipeline(ys, econfig);
        SkewGDensity l2_model{efit.reference, *efit.l2};
        double dmin = 1e300;
        for (int i = 0; i <= 4096; ++i)
            dmin = std::min(dmin, eval_cd(l2_model.cd, i / 4096.0));
        if (!(dmin > 0.0))
            fail("DomainError", "sampler check expects a positive linear fit");
        models.push_back(l2_model);
    }

    int okay = 0;
    const int runs = 100;
    for (int run = 0; run < runs; ++run) {
        const auto& sk = models[run % models.size()];
        auto draws = sample_skewg(sk, n, derive_seed(900, std::to_string(run)));
        std::vector<double> us(draws.size());
        for (std::size_t i = 0; i < draws.size(); ++i)
            us[i] = ref_cdf(sk.reference, draws[i]);
        std::sort(us.begin(), us.end());
        double ks = 0;
        for (std::size_t i = 0; i < us.size(); ++i) {
            double d = cd_distribution(sk.cd, us[i]);
            ks = std::max(ks, std::abs((i + 1.0) / n - d));
            ks = std::max(ks, std::abs(d - static_cast<double>(i) / n));
        }
        okay += ks < band;
    }
    report(7, "sampler matches the fitted cumulative", okay >= 95,
           std::to_string(okay) + "/100 runs under the 99% band " + fmt(band, 4) +
               " (need 95), three models, n=1000");
}

// ---- criterion 8: batch determinism and failure isolation ----

void criterion_batch() {
    NamedColumns matrix;
    for (int v = 0; v < 1000; ++v) {
        std::string name = "g" + std::to_string(v);
        if (v == 500) {
            matrix.emplace_back(name, std::vector<double>(100, 1.0));
            continue;
        }
        Rng rng(derive_seed(17, name));
        std::vector<double> xs(100);
        for (double& x : xs)
            x = rng.normal();
        matrix.emplace_back(name, std::move(xs));
    }

    PipelineConfig config;
    config.seed = 11;
    auto one = run_batch(matrix, config, 1);
    auto eight = run_batch(matrix, config, 8);
    bool identical = batch_to_json(one).dump() == batch_to_json(eight).dump();

    int fit_failures = 0, clean = 0;
    for (const auto& r : one.results) {
        if (r.error == "FitFailure")
            ++fit_failures;
        else if (r.error.empty())
            ++clean;
    }
    bool isolated = fit_failures == 1 && clean == 999;
    report(8, "batch determinism and isolation", identical && isolated,
           std::string("1 vs 8 workers ") + (identical ? "identical" : "DIFFER") +
               ", " + std::to_string(fit_failures) + " fit failure(s), " +
               std::to_string(clean) + " clean results over 1000 variables");
}

} // namespace

int main(int argc, char** argv) {
    struct Step {
        void (*fn)();
        int id;
        const char* label;
    };
    const Step steps[] = {
        {criterion_orthonormality, 5, "basis orthonormality and closed forms"},
        {criterion_kernel_identity, 4, "series estimate equals its kernel form"},
        {criterion_maxent, 6, "exponential-family fit correctness"},
        {criterion_null_calibration, 3, "null calibration of score means"},
        {criterion_sampler, 7, "sampler matches the fitted cumulative"},
        {criterion_golden, 2, "frozen fit golden file"},
        {criterion_batch, 8, "batch determinism and isolation"},
        {criterion_benchmark, 1, "benchmark mode recovery"},
    };
    // optional args: criterion ids to run (default all)
    std::set<int> only;
    for (int i = 1; i < argc; ++i)
        only.insert(std::atoi(argv[i]));
    int ran = 0;
    for (const auto& step : steps) {
        if (!only.empty() && !only.count(step.id))
            continue;
        ++ran;
        try {
            step.fn();
        } catch (const std::exception& e) {
            report(step.id, step.label, false, std::string("exception: ") + e.what());
        }
    }
    std::cout << (ran - failures) << "/" << ran << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
