#include "lpmode/skew_g.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "lpmode/errors.hpp"

namespace lpmode {

double eval_f(const SkewGDensity& sk, double x) {
    double g = ref_pdf(sk.reference, x);
    if (g <= 0.0)
        return 0.0;
    return g * eval_cd(sk.cd, ref_cdf(sk.reference, x));
}

namespace {

constexpr double inv_phi = 0.6180339887498949;

double golden_max(const std::function<double(double)>& fn, double a, double b,
                  double tol, double& height) {
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = fn(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = fn(x1);
        }
    }
    double x = 0.5 * (a + b);
    height = fn(x);
    return x;
}

struct GridScan {
    std::vector<double> ts, fs;
    ModeSet modes;                 // locations/heights only
    std::vector<int> mode_cells;   // grid index nearest each mode
};

GridScan scan_maxima(const std::function<double(double)>& fn, double lo,
                     double hi, int grid, double refine_tol, ModeSpace space) {
    if (grid < 100)
        fail("DomainError", "find_local_maxima: grid must be >= 100");
    if (!(lo < hi))
        fail("DomainError", "find_local_maxima: need lo < hi");

    GridScan out;
    out.modes.space = space;
    out.ts.resize(grid);
    out.fs.resize(grid);
    const double step = (hi - lo) / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        out.ts[i] = lo + i * step;
        out.fs[i] = fn(out.ts[i]);
    }
    out.ts[grid - 1] = hi;

    int i = 1;
    while (i <= grid - 2) {
        if (out.fs[i] <= out.fs[i - 1]) {
            ++i;
            continue;
        }
        int run_end = i;
        while (run_end + 1 <= grid - 1 && out.fs[run_end + 1] == out.fs[i])
            ++run_end;
        if (run_end >= grid - 1) // plateau reaching the endpoint
            break;
        if (out.fs[run_end + 1] < out.fs[i]) {
            if (run_end == i) {
                double h;
                double x = golden_max(fn, out.ts[i - 1], out.ts[i + 1],
                                      refine_tol, h);
                out.modes.locations.push_back(x);
                out.modes.heights.push_back(h);
                out.mode_cells.push_back(i);
            } else {
                out.modes.locations.push_back(0.5 * (out.ts[i] + out.ts[run_end]));
                out.modes.heights.push_back(out.fs[i]);
                out.mode_cells.push_back((i + run_end) / 2);
            }
        }
        i = run_end + 1;
    }
    return out;
}

// jumps[i] = height[i] - min over the two adjacent valley levels, where a
// valley level is the lowest grid value between this mode and its neighbor
// mode (or the domain endpoint).
void fill_jumps(GridScan& scan) {
    auto& m = scan.modes;
    const int k = static_cast<int>(m.locations.size());
    m.jumps.assign(k, 0.0);
    if (k == 0)
        return;
    const int last = static_cast<int>(scan.fs.size()) - 1;
    for (int i = 0; i < k; ++i) {
        int left_stop = (i == 0) ? 0 : scan.mode_cells[i - 1];
        int right_stop = (i == k - 1) ? last : scan.mode_cells[i + 1];
        double left_min = scan.fs[left_stop];
        for (int c = left_stop; c <= scan.mode_cells[i]; ++c)
            left_min = std::min(left_min, scan.fs[c]);
        double right_min = scan.fs[right_stop];
        for (int c = scan.mode_cells[i]; c <= right_stop; ++c)
            right_min = std::min(right_min, scan.fs[c]);
        m.jumps[i] = m.heights[i] - std::min(left_min, right_min);
    }
}

void drop_nonpositive(GridScan& scan) {
    auto& m = scan.modes;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < m.locations.size(); ++i) {
        if (m.heights[i] > 0.0) {
            m.locations[kept] = m.locations[i];
            m.heights[kept] = m.heights[i];
            if (!m.jumps.empty())
                m.jumps[kept] = m.jumps[i];
            scan.mode_cells[kept] = scan.mode_cells[i];
            ++kept;
        }
    }
    m.locations.resize(kept);
    m.heights.resize(kept);
    if (!m.jumps.empty())
        m.jumps.resize(kept);
    scan.mode_cells.resize(kept);
}

// Flat stretches (both central-difference derivatives near zero) away from
// every detected mode and above a small height floor that suppresses
// vanishing-tail hits; contiguous runs report their midpoint.
void fill_shoulders(GridScan& scan) {
    auto& m = scan.modes;
    const int grid = static_cast<int>(scan.fs.size());
    const double range = scan.ts.back() - scan.ts.front();
    const double step = range / (grid - 1);
    double fmax = *std::max_element(scan.fs.begin(), scan.fs.end());
    if (!(fmax > 0.0))
        return;
    const double d1_tol = 1e-3 * fmax / range;
    const double d2_tol = 1e-2 * fmax / (range * range);
    const double floor = 1e-2 * fmax;

    int run_start = -1;
    auto close_run = [&](int run_end) {
        if (run_start >= 0)
            m.shoulders.push_back(0.5 * (scan.ts[run_start] + scan.ts[run_end]));
        run_start = -1;
    };
    for (int i = 1; i <= grid - 2; ++i) {
        double d1 = (scan.fs[i + 1] - scan.fs[i - 1]) / (2.0 * step);
        double d2 = (scan.fs[i + 1] - 2.0 * scan.fs[i] + scan.fs[i - 1]) /
                    (step * step);
        bool near_mode = false;
        for (double loc : m.locations)
            if (std::abs(scan.ts[i] - loc) <= 2.0 * step)
                near_mode = true;
        bool flat = std::abs(d1) <= d1_tol && std::abs(d2) <= d2_tol &&
                    scan.fs[i] >= floor && !near_mode;
        if (flat && run_start < 0)
            run_start = i;
        else if (!flat && run_start >= 0)
            close_run(i - 1);
    }
    close_run(grid - 2);
}

} // namespace

ModeSet find_local_maxima(const std::function<double(double)>& fn, double lo,
                          double hi, int grid, double refine_tol,
                          ModeSpace space) {
    return scan_maxima(fn, lo, hi, grid, refine_tol, space).modes;
}

ModeSet modes_of_cd(const ComparisonDensity& cd, int grid,
                    double refine_tol_frac) {
    auto fn = [&](double u) { return eval_cd(cd, u); };
    GridScan scan = scan_maxima(fn, 0.0, 1.0, grid, refine_tol_frac, ModeSpace::U);

    // Excess density piling up against an endpoint is a bump the duality
    // count must see: a d-hat maximum at u = 0 or 1 often has no matching
    // interior maximum in f-hat (it may flatten into a shoulder there), and
    // dropping it from the count discards the corresponding f-hat mode in
    // reconciliation.
    const int last = grid - 1;
    if (scan.fs[0] > scan.fs[1]) {
        scan.modes.locations.insert(scan.modes.locations.begin(), 0.0);
        scan.modes.heights.insert(scan.modes.heights.begin(), scan.fs[0]);
        scan.mode_cells.insert(scan.mode_cells.begin(), 0);
    }
    if (scan.fs[last] > scan.fs[last - 1]) {
        scan.modes.locations.push_back(1.0);
        scan.modes.heights.push_back(scan.fs[last]);
        scan.mode_cells.push_back(last);
    }

    fill_jumps(scan);

    // A boundary upturn rising out of a negative valley is ringing of the
    // signed series, not mass piled against the endpoint: between such a
    // bump and the rest of the distribution the estimate is not even a
    // density. jump > height means the adjacent valley dips below zero.
    auto& m = scan.modes;
    for (std::size_t i = m.locations.size(); i-- > 0;) {
        bool boundary = m.locations[i] == 0.0 || m.locations[i] == 1.0;
        if (boundary && m.jumps[i] > m.heights[i]) {
            m.locations.erase(m.locations.begin() + i);
            m.heights.erase(m.heights.begin() + i);
            m.jumps.erase(m.jumps.begin() + i);
            scan.mode_cells.erase(scan.mode_cells.begin() + i);
        }
    }

    drop_nonpositive(scan);
    return scan.modes;
}

ModeSet modes_of_f(const SkewGDensity& sk, int grid, double tail_delta,
                   double refine_tol_frac) {
    if (!(tail_delta > 0.0 && tail_delta < 0.5))
        fail("DomainError", "modes_of_f: tail_delta must lie in (0, 0.5)");
    double lo = ref_quantile(sk.reference, tail_delta);
    double hi = ref_quantile(sk.reference, 1.0 - tail_delta);
    auto fn = [&](double x) { return eval_f(sk, x); };
    GridScan scan = scan_maxima(fn, lo, hi, grid, refine_tol_frac * (hi - lo),
                                ModeSpace::X);
    fill_jumps(scan);
    drop_nonpositive(scan);
    fill_shoulders(scan);
    return scan.modes;
}

ModeSet reconcile_modes(const ModeSet& m_d, const ModeSet& m_f) {
    if (m_d.space != ModeSpace::U || m_f.space != ModeSpace::X)
        fail("InconsistentSpaces",
             "reconcile_modes: expected a U-space and an X-space mode set");

    const std::size_t kd = m_d.locations.size();
    const std::size_t kf = m_f.locations.size();
    if (kf <= kd)
        return m_f;
    if (kd == 0 && kf == 1)
        return m_f;

    std::vector<std::size_t> order(kf);
    for (std::size_t i = 0; i < kf; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (m_f.jumps[a] != m_f.jumps[b])
            return m_f.jumps[a] > m_f.jumps[b];
        return m_f.locations[a] < m_f.locations[b];
    });
    order.resize(kd);
    std::sort(order.begin(), order.end());

    ModeSet out;
    out.space = ModeSpace::X;
    out.shoulders = m_f.shoulders;
    for (std::size_t idx : order) {
        out.locations.push_back(m_f.locations[idx]);
        out.heights.push_back(m_f.heights[idx]);
        out.jumps.push_back(m_f.jumps[idx]);
    }
    return out;
}

nlohmann::json modes_to_json(const ModeSet& m) {
    nlohmann::json j;
    j["space"] = m.space == ModeSpace::U ? "u" : "x";
    j["locations"] = m.locations;
    j["heights"] = m.heights;
    j["jumps"] = m.jumps;
    j["shoulders"] = m.shoulders;
    return j;
}

} // namespace lpmode
