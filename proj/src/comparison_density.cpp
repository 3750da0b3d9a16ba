#include "lpmode/comparison_density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lpmode/errors.hpp"
#include "lpmode/quadrature.hpp"

namespace lpmode {

SelectionResult aic_select(const LPCoefficients& coeffs, SelectionRule rule) {
    const int m = coeffs.m_max;
    SelectionResult sel;
    sel.order_by_magnitude.resize(m);
    std::iota(sel.order_by_magnitude.begin(), sel.order_by_magnitude.end(), 1);
    std::stable_sort(sel.order_by_magnitude.begin(), sel.order_by_magnitude.end(),
                     [&](int a, int b) {
                         double ma = std::abs(coeffs.values[a - 1]);
                         double mb = std::abs(coeffs.values[b - 1]);
                         if (ma != mb)
                             return ma > mb;
                         return a < b;
                     });

    const double n = static_cast<double>(coeffs.n);
    const double penalty =
        (rule == SelectionRule::AIC ? 2.0 : std::log(n)) / n;

    sel.aic_trace.assign(m + 1, 0.0);
    int best_k = 0;
    double best = 0.0;
    for (int k = 1; k <= m; ++k) {
        double v = coeffs.values[sel.order_by_magnitude[k - 1] - 1];
        sel.aic_trace[k] = sel.aic_trace[k - 1] + v * v - penalty;
        if (sel.aic_trace[k] > best) {
            best = sel.aic_trace[k];
            best_k = k;
        }
    }
    sel.k_selected = best_k;
    sel.selected_indices.assign(sel.order_by_magnitude.begin(),
                                sel.order_by_magnitude.begin() + best_k);
    return sel;
}

std::string cd_kind_name(CdKind kind) {
    return kind == CdKind::L2 ? "l2" : "maxent";
}

namespace {

// Selected indices in ascending order with their LP means.
void selected_ascending(const LPCoefficients& coeffs, const SelectionResult& sel,
                        std::vector<int>& indices, std::vector<double>& values) {
    indices = sel.selected_indices;
    std::sort(indices.begin(), indices.end());
    values.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        int j = indices[i];
        if (j < 1 || j > coeffs.m_max)
            fail("DomainError", "selection index out of range of LP means");
        values[i] = coeffs.values[j - 1];
    }
}

constexpr int max_basis_order = 64;

void basis_at(const std::vector<int>& indices, double u, double* out) {
    if (indices.empty())
        return;
    int m = indices.back();
    if (m > max_basis_order)
        fail("DomainError", "basis order too large");
    double all[max_basis_order + 1];
    shifted_legendre_all(m, u, all);
    for (std::size_t i = 0; i < indices.size(); ++i)
        out[i] = all[indices[i]];
}

} // namespace

ComparisonDensity fit_l2(const LPCoefficients& coeffs, const SelectionResult& sel) {
    ComparisonDensity cd;
    cd.kind = CdKind::L2;
    selected_ascending(coeffs, sel, cd.indices, cd.coeffs);
    return cd;
}

ComparisonDensity fit_maxent(const LPCoefficients& coeffs,
                             const SelectionResult& sel, int quad_nodes) {
    if (quad_nodes < 64)
        fail("DomainError", "fit_maxent: quad_nodes must be >= 64");

    ComparisonDensity cd;
    cd.kind = CdKind::MaxEnt;
    cd.quad_nodes = quad_nodes;
    std::vector<double> target;
    selected_ascending(coeffs, sel, cd.indices, target);
    if (cd.indices.empty())
        return cd;

    const int J = static_cast<int>(cd.indices.size());
    const QuadRule& rule = gauss_legendre(quad_nodes);
    const int Q = quad_nodes;

    Eigen::MatrixXd B(Q, J);
    std::vector<double> row(cd.indices.size());
    for (int q = 0; q < Q; ++q) {
        basis_at(cd.indices, rule.nodes[q], row.data());
        for (int j = 0; j < J; ++j)
            B(q, j) = row[j];
    }
    Eigen::Map<const Eigen::VectorXd> lp(target.data(), J);
    Eigen::Map<const Eigen::VectorXd> w(rule.weights.data(), Q);

    // Dual objective and its pieces at a given theta.
    auto evaluate = [&](const Eigen::VectorXd& theta, double& log_z,
                        Eigen::VectorXd& moments, Eigen::VectorXd& scaled_w) {
        Eigen::VectorXd s = B * theta;
        double smax = s.maxCoeff();
        scaled_w = (s.array() - smax).exp() * w.array();
        double z = scaled_w.sum();
        log_z = smax + std::log(z);
        moments = B.transpose() * scaled_w / z;
        scaled_w /= z;
    };

    Eigen::VectorXd theta = lp;
    double log_z = 0.0;
    Eigen::VectorXd moments(J), dens_w(Q);
    evaluate(theta, log_z, moments, dens_w);
    double psi = log_z - theta.dot(lp);

    const int max_iter = 200;
    const double grad_tol = 1e-10;
    // Near the optimum the Armijo decrement falls below the floating-point
    // resolution of psi; a stalled search with residuals this small is
    // converged for every consumer of the fit.
    const double stall_tol = 1e-8;
    double grad_norm = 0.0;
    auto finish = [&]() {
        cd.coeffs.assign(theta.data(), theta.data() + J);
        cd.theta0 = -log_z;
        return cd;
    };
    for (int iter = 0; iter < max_iter; ++iter) {
        Eigen::VectorXd grad = moments - lp;
        grad_norm = grad.lpNorm<Eigen::Infinity>();
        if (grad_norm <= grad_tol)
            return finish();

        Eigen::MatrixXd H = B.transpose() * dens_w.asDiagonal() * B -
                            moments * moments.transpose();
        Eigen::VectorXd step;
        for (double ridge = 0.0;; ridge = std::max(1e-12, ridge * 10.0)) {
            Eigen::MatrixXd Hr = H;
            if (ridge > 0.0)
                Hr.diagonal().array() += ridge;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(Hr);
            step = ldlt.solve(-grad);
            if (ldlt.info() == Eigen::Success && step.allFinite() &&
                grad.dot(step) < 0.0)
                break;
            if (ridge > 1e6)
                fail("NonConvergence",
                     "fit_maxent: singular curvature, gradient norm " +
                         std::to_string(grad_norm));
        }

        double slope = grad.dot(step);
        double alpha = 1.0;
        for (;;) {
            Eigen::VectorXd trial = theta + alpha * step;
            double trial_log_z;
            Eigen::VectorXd trial_m(J), trial_w(Q);
            evaluate(trial, trial_log_z, trial_m, trial_w);
            double trial_psi = trial_log_z - trial.dot(lp);
            if (trial_psi <= psi + 1e-4 * alpha * slope) {
                theta = trial;
                log_z = trial_log_z;
                moments = trial_m;
                dens_w = trial_w;
                psi = trial_psi;
                break;
            }
            alpha *= 0.5;
            if (alpha < 1e-14) {
                if (grad_norm <= stall_tol)
                    return finish();
                fail("NonConvergence",
                     "fit_maxent: line search stalled, gradient norm " +
                         std::to_string(grad_norm));
            }
        }
    }
    grad_norm = (moments - lp).lpNorm<Eigen::Infinity>();
    if (grad_norm <= stall_tol)
        return finish();
    std::ostringstream msg;
    msg << "fit_maxent: no convergence in " << max_iter
        << " iterations, gradient norm " << grad_norm;
    fail("NonConvergence", msg.str());
}

double eval_cd(const ComparisonDensity& cd, double u) {
    if (!(u >= 0.0 && u <= 1.0))
        fail("DomainError", "eval_cd: u must lie in [0,1]");
    if (cd.indices.empty())
        return 1.0;
    double basis[max_basis_order + 1];
    basis_at(cd.indices, u, basis);
    double s = 0.0;
    for (std::size_t i = 0; i < cd.indices.size(); ++i)
        s += cd.coeffs[i] * basis[i];
    if (cd.kind == CdKind::L2)
        return 1.0 + s;
    return std::exp(cd.theta0 + s);
}

namespace {

// ∫_0^u Leg_j for j >= 1 via (P_{j+1} - P_{j-1}) / (2 sqrt(2j+1)) at 2u-1;
// both boundary terms vanish at u = 0.
double l2_distribution_raw(const ComparisonDensity& cd, double u) {
    double s = 2.0 * u - 1.0;
    double acc = u;
    for (std::size_t i = 0; i < cd.indices.size(); ++i) {
        int j = cd.indices[i];
        acc += cd.coeffs[i] * (legendre_p(j + 1, s) - legendre_p(j - 1, s)) /
               (2.0 * std::sqrt(2.0 * j + 1.0));
    }
    return acc;
}

} // namespace

double cd_distribution(const ComparisonDensity& cd, double u) {
    if (!(u >= 0.0 && u <= 1.0))
        fail("DomainError", "cd_distribution: u must lie in [0,1]");
    if (u == 0.0)
        return 0.0;
    if (cd.indices.empty())
        return u;
    if (cd.kind == CdKind::MaxEnt)
        return adaptive_simpson([&](double t) { return eval_cd(cd, t); }, 0.0, u,
                                1e-10);

    // Running-max envelope over a fixed scan keeps the result monotone in u
    // where the raw series integrates a negative stretch.
    const int scan = 4096;
    double best = l2_distribution_raw(cd, u);
    for (int i = 1; i < scan; ++i) {
        double t = u * i / scan;
        best = std::max(best, l2_distribution_raw(cd, t));
    }
    return std::clamp(best, 0.0, 1.0);
}

nlohmann::json cd_to_json(const ComparisonDensity& cd) {
    nlohmann::json j;
    j["kind"] = cd_kind_name(cd.kind);
    j["indices"] = cd.indices;
    if (cd.kind == CdKind::L2) {
        j["coeffs"] = cd.coeffs;
    } else {
        j["theta"] = cd.coeffs;
        j["theta0"] = cd.theta0;
        j["quad_nodes"] = cd.quad_nodes;
    }
    return j;
}

ComparisonDensity cd_from_json(const nlohmann::json& j) {
    ComparisonDensity cd;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "l2")
        cd.kind = CdKind::L2;
    else if (kind == "maxent")
        cd.kind = CdKind::MaxEnt;
    else
        fail("DomainError", "unknown comparison density kind '" + kind + "'");
    cd.indices = j.at("indices").get<std::vector<int>>();
    if (!std::is_sorted(cd.indices.begin(), cd.indices.end()))
        fail("DomainError", "comparison density indices must be ascending");
    if (cd.kind == CdKind::L2) {
        cd.coeffs = j.at("coeffs").get<std::vector<double>>();
    } else {
        cd.coeffs = j.at("theta").get<std::vector<double>>();
        cd.theta0 = j.value("theta0", 0.0);
        cd.quad_nodes = j.value("quad_nodes", 128);
    }
    if (cd.coeffs.size() != cd.indices.size())
        fail("DomainError", "comparison density coeffs/indices size mismatch");
    return cd;
}

} // namespace lpmode
