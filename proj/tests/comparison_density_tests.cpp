#include <doctest.h>

#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpmode/comparison_density.hpp"
#include "lpmode/errors.hpp"
#include "lpmode/quadrature.hpp"
#include "lpmode/rng.hpp"

using namespace lpmode;

namespace {

LPCoefficients means_of(std::vector<double> values, std::size_t n) {
    LPCoefficients c;
    c.m_max = static_cast<int>(values.size());
    c.values = std::move(values);
    c.n = n;
    return c;
}

SelectionResult select_all(const std::vector<int>& indices) {
    SelectionResult sel;
    sel.order_by_magnitude = indices;
    sel.k_selected = static_cast<int>(indices.size());
    sel.selected_indices = indices;
    return sel;
}

} // namespace

TEST_CASE("adaptive selection walks the penalized trace") {
    auto sel = aic_select(means_of({0.01, 0.30, 0.02, 0.25}, 100));
    CHECK(sel.order_by_magnitude == std::vector<int>{2, 4, 3, 1});
    REQUIRE(sel.aic_trace.size() == 5);
    CHECK(sel.aic_trace[0] == 0.0);
    CHECK(sel.aic_trace[1] == doctest::Approx(0.07).epsilon(1e-12));
    CHECK(sel.aic_trace[2] == doctest::Approx(0.1125).epsilon(1e-12));
    CHECK(sel.aic_trace[3] == doctest::Approx(0.0929).epsilon(1e-12));
    CHECK(sel.aic_trace[4] == doctest::Approx(0.0730).epsilon(1e-12));
    CHECK(sel.k_selected == 2);
    CHECK(sel.selected_indices == std::vector<int>{2, 4});
}

TEST_CASE("selection keeps nothing when no coefficient clears the penalty") {
    auto sel = aic_select(means_of({0.0, 0.0, 0.0}, 500));
    CHECK(sel.k_selected == 0);
    CHECK(sel.selected_indices.empty());
    for (double a : sel.aic_trace)
        CHECK(a <= 0.0);
}

TEST_CASE("selection tie-breaks: magnitude ties keep index order, score ties keep smaller k") {
    auto sel = aic_select(means_of({0.3, -0.3}, 1000));
    CHECK(sel.order_by_magnitude == std::vector<int>{1, 2});

    // both coefficients sit exactly on the AIC penalty (dyadic values, so the
    // arithmetic is exact): every prefix of the trace scores zero and the
    // empty model wins the tie
    auto flat = aic_select(means_of({0.25, 0.25}, 32));
    CHECK(flat.aic_trace[1] == 0.0);
    CHECK(flat.aic_trace[2] == 0.0);
    CHECK(flat.k_selected == 0);
}

TEST_CASE("bic penalizes harder than aic") {
    auto coeffs = means_of({0.15}, 100); // 0.0225 against 0.02 (aic) vs 0.046 (bic)
    CHECK(aic_select(coeffs, SelectionRule::AIC).k_selected == 1);
    CHECK(aic_select(coeffs, SelectionRule::BIC).k_selected == 0);
}

TEST_CASE("linear-series fit evaluates its closed form") {
    auto cd = fit_l2(means_of({0.5}, 100), select_all({1}));
    CHECK(cd.kind == CdKind::L2);
    CHECK(cd.indices == std::vector<int>{1});
    CHECK(cd.coeffs == std::vector<double>{0.5});
    CHECK(eval_cd(cd, 0.0) == doctest::Approx(1.0 - std::sqrt(3.0) / 2).epsilon(1e-12));
    CHECK(eval_cd(cd, 1.0) == doctest::Approx(1.0 + std::sqrt(3.0) / 2).epsilon(1e-12));
    CHECK(eval_cd(cd, 0.5) == doctest::Approx(1.0).epsilon(1e-12));

    auto single = fit_l2(means_of({0.0, 0.2}, 100), select_all({2}));
    CHECK(eval_cd(single, 0.5) ==
          doctest::Approx(1.0 - 0.2 * std::sqrt(5.0) / 2).epsilon(1e-12));

    // any series with the constant term fixed at one integrates to one
    const QuadRule& rule = gauss_legendre(128);
    double total = integrate([&](double u) { return eval_cd(cd, u); }, rule);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty selection gives the flat density for both estimators") {
    auto coeffs = means_of({0.001, -0.002}, 400);
    SelectionResult none;
    none.aic_trace = {0.0};
    auto flat = fit_l2(coeffs, none);
    auto flat_me = fit_maxent(coeffs, none);
    CHECK(flat_me.theta0 == 0.0);
    for (double u : {0.0, 0.25, 0.8, 1.0}) {
        CHECK(eval_cd(flat, u) == 1.0);
        CHECK(eval_cd(flat_me, u) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(cd_distribution(flat, 0.37) == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("single-constraint exponential fit agrees with a bisection solve") {
    const double target = 0.1;
    auto cd = fit_maxent(means_of({target}, 100), select_all({1}));
    REQUIRE(cd.indices == std::vector<int>{1});

    const QuadRule& rule = gauss_legendre(256);
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
    double lo = -5, hi = 5;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (mean_at(mid) < target ? lo : hi) = mid;
    }
    double theta = 0.5 * (lo + hi);
    CHECK(std::abs((cd.coeffs[0]) - (theta)) <= 1e-8);

    double z = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
        z += rule.weights[q] * std::exp(theta * shifted_legendre(1, rule.nodes[q]));
    CHECK(std::abs((cd.theta0) - (-std::log(z))) <= 1e-8);
}

TEST_CASE("exponential fits match their moments and integrate to one") {
    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        int k = 1 + static_cast<int>(rng.u01() * 3);
        std::vector<int> indices;
        while (static_cast<int>(indices.size()) < k) {
            int j = 1 + static_cast<int>(rng.u01() * 8);
            bool dup = false;
            for (int seen : indices)
                dup = dup || seen == j;
            if (!dup)
                indices.push_back(j);
        }
        std::vector<double> values(8, 0.0);
        for (int j : indices)
            values[j - 1] = 0.3 * (rng.u01() - 0.5);
        auto cd = fit_maxent(means_of(values, 200), select_all(indices));

        const QuadRule& rule = gauss_legendre(256);
        double total = integrate([&](double u) { return eval_cd(cd, u); }, rule);
        CHECK(std::abs((total) - (1.0)) <= 1e-8);
        for (int j : indices) {
            double moment = integrate(
                [&](double u) { return eval_cd(cd, u) * shifted_legendre(j, u); }, rule);
            CHECK(std::abs((moment) - (values[j - 1])) <= 1e-8);
        }
        for (double u : {0.0, 0.31, 0.77, 1.0})
            CHECK(eval_cd(cd, u) > 0.0);
    }
}

TEST_CASE("infeasible moment targets fail with NonConvergence") {
    // no density on [0,1] has a Leg_1 mean beyond sqrt(3)
    try {
        fit_maxent(means_of({1.74}, 100), select_all({1}));
        FAIL("expected NonConvergence");
    } catch (const Error& e) {
        CHECK(e.code() == "NonConvergence");
    }
}

TEST_CASE("cumulative of a positive linear series is its antiderivative") {
    auto cd = fit_l2(means_of({0.0, 0.3}, 100), select_all({2}));
    for (double u : {0.0, 0.1, 0.3, 0.5, 0.77, 1.0}) {
        double want = u + 0.3 * std::sqrt(5.0) * (2 * u * u * u - 3 * u * u + u);
        CHECK(std::abs((cd_distribution(cd, u)) - (want)) <= 1e-12);
    }
}

TEST_CASE("cumulative stays monotone when the series dips negative") {
    auto cd = fit_l2(means_of({-0.8}, 100), select_all({1}));
    CHECK(eval_cd(cd, 1.0) < 0.0);
    double prev = cd_distribution(cd, 0.0);
    CHECK(prev == 0.0);
    for (int i = 1; i <= 2000; ++i) {
        double cur = cd_distribution(cd, i / 2000.0);
        CHECK(cur >= prev - 1e-14);
        CHECK(cur <= 1.0 + 1e-14);
        prev = cur;
    }
    CHECK(cd_distribution(cd, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exponential cumulative is a proper distribution") {
    auto cd = fit_maxent(means_of({0.2, -0.1}, 150), select_all({1, 2}));
    CHECK(std::abs((cd_distribution(cd, 0.0)) - (0.0)) <= 1e-10);
    CHECK(std::abs((cd_distribution(cd, 1.0)) - (1.0)) <= 1e-8);
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
        double cur = cd_distribution(cd, i / 200.0);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("comparison density json round trip") {
    auto l2 = fit_l2(means_of({0.5, -0.2}, 80), select_all({1, 2}));
    auto me = fit_maxent(means_of({0.1, 0.05}, 80), select_all({1, 2}));
    for (const auto& cd : {l2, me}) {
        auto back = cd_from_json(cd_to_json(cd));
        CHECK(back.kind == cd.kind);
        CHECK(back.indices == cd.indices);
        CHECK(back.coeffs == cd.coeffs);
        CHECK(back.theta0 == cd.theta0);
        CHECK(back.quad_nodes == cd.quad_nodes);
    }
}
