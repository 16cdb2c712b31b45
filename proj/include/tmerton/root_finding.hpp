#pragma once

#include <functional>

namespace tmerton {

struct RootResult {
    double x = 0.0;
    double f_at_x = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Brent's method on a sign-changing bracket [a, b]: bisection guarded by
// secant / inverse-quadratic steps. Stops when |f| <= f_tol or the bracket
// shrinks below x_tol. Throws NumericalError if [a, b] does not bracket.
RootResult find_root_brent(const std::function<double(double)>& f, double a, double b,
                           double f_tol, double x_tol = 1e-13, int max_iter = 200);

struct MinimizeResult {
    double x = 0.0;
    double f_at_x = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Brent's derivative-free minimizer on [a, b] (golden section with parabolic
// acceleration).
MinimizeResult minimize_brent(const std::function<double(double)>& f, double a, double b,
                              double x_tol = 1e-10, int max_iter = 200);

}  // namespace tmerton
