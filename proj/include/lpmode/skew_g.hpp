#pragma once

#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lpmode/comparison_density.hpp"
#include "lpmode/reference_model.hpp"

namespace lpmode {

// Density estimate f(x) = g(x) * d(G(x)).
struct SkewGDensity {
    ReferenceModel reference;
    ComparisonDensity cd;
};

double eval_f(const SkewGDensity& sk, double x);

enum class ModeSpace { U, X };

struct ModeSet {
    ModeSpace space = ModeSpace::U;
    std::vector<double> locations; // strictly increasing
    std::vector<double> heights;
    std::vector<double> jumps;
    std::vector<double> shoulders;
};

// Interior local maxima of fn on [lo,hi]: strict grid maxima refined by
// golden-section search to interval width refine_tol; exact-tie plateaus
// collapse to their midpoint; endpoints are never reported. Fills locations
// and heights only.
ModeSet find_local_maxima(const std::function<double(double)>& fn, double lo,
                          double hi, int grid, double refine_tol,
                          ModeSpace space);

// Modes of the comparison density itself ("bumps above background").
// Unlike find_local_maxima, boundary maxima at u = 0 or 1 are included:
// excess density piled against an endpoint is a bump, and the duality
// reconciliation needs it in the count. Two artifact guards apply: maxima
// with nonpositive height are dropped (an L2 series can dip negative), and
// a boundary maximum whose adjacent valley dips below zero is discarded as
// ringing. refine_tol_frac is a fraction of the search range.
ModeSet modes_of_cd(const ComparisonDensity& cd, int grid = 1000,
                    double refine_tol_frac = 1e-6);

// Modes of the full density over [Q(tail_delta), Q(1-tail_delta)], with
// modal jumps and shoulder candidates (grid points where the first two
// central-difference derivatives are both near zero, away from any mode).
ModeSet modes_of_f(const SkewGDensity& sk, int grid = 1000,
                   double tail_delta = 1e-4, double refine_tol_frac = 1e-6);

// Duality step: if f has no more modes than d, keep the f modes; otherwise
// keep the |modes of d| f-modes with the largest modal jumps. An empty d
// mode set with a single f mode passes through (unimodal reference case).
ModeSet reconcile_modes(const ModeSet& m_d, const ModeSet& m_f);

nlohmann::json modes_to_json(const ModeSet& m);

} // namespace lpmode
