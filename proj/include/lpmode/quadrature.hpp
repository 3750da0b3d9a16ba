#pragma once

#include <functional>
#include <vector>

namespace lpmode {

// Gauss-Legendre rule remapped to [0,1].
struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes by Newton iteration on the Legendre polynomial; rules are cached
// per node count and safe to request concurrently.
const QuadRule& gauss_legendre(int n);

double integrate(const std::function<double(double)>& fn, const QuadRule& rule);

// Adaptive Simpson on [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& fn, double a,
                        double b, double tol);

} // namespace lpmode
