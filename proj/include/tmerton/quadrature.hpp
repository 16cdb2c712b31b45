#pragma once

#include <functional>
#include <vector>

namespace tmerton {

struct QuadratureConfig {
    int hermite_order = 128;   // fast path for smooth integrands
    double abs_tol = 1e-10;    // absolute tolerance on E[g(Z)]
    int max_panels = 4000;     // adaptive subdivision budget

    // Firm-value points where the payoff is non-smooth (e.g. the face value
    // of min(face, v)). The pricer maps them into the integration variable
    // and pins panel edges there, so no kink can hide between sample nodes.
    std::vector<double> payoff_breakpoints;
};

// Gauss-Hermite estimate of E[g(Z)], Z standard normal. Nodes and weights
// are cached per order.
double gauss_hermite_expectation(const std::function<double(double)>& g, int order);

struct AdaptiveResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};

// Adaptive Gauss-Kronrod (7, 15) on g(z) * phi(z) over [-12, 12]; the mass
// outside is below 1e-32 for bounded g. Panels split at the largest error
// first. z_breakpoints become mandatory panel edges; a final sweep splits
// every panel once and keeps refining while the total moves.
AdaptiveResult adaptive_gaussian_expectation(const std::function<double(double)>& g,
                                             double abs_tol, int max_panels,
                                             const std::vector<double>& z_breakpoints = {});

// E[g(Z)] to cfg.abs_tol. Without breakpoints a pair of Gauss-Hermite orders
// that already agree is accepted; otherwise (and always with breakpoints)
// the adaptive rule decides. Throws NumericalError with the achieved error
// estimate if the panel budget runs out first.
double gaussian_expectation(const std::function<double(double)>& g,
                            const QuadratureConfig& cfg = {},
                            const std::vector<double>& z_breakpoints = {});

}  // namespace tmerton
