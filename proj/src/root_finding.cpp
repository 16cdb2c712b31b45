#include "tmerton/root_finding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmerton/errors.hpp"

namespace tmerton {

RootResult find_root_brent(const std::function<double(double)>& f, double a, double b,
                           double f_tol, double x_tol, int max_iter) {
    double fa = f(a);
    double fb = f(b);
    if (std::abs(fa) <= f_tol) return {a, fa, 0, true};
    if (std::abs(fb) <= f_tol) return {b, fb, 0, true};
    if (fa * fb > 0.0)
        throw NumericalError("find_root_brent: interval does not bracket a sign change");

    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa;
    double d = b - a;
    bool used_bisection = true;

    for (int iter = 1; iter <= max_iter; ++iter) {
        double s;
        if (fa != fc && fb != fc) {
            // inverse quadratic interpolation
            s = a * fb * fc / ((fa - fb) * (fa - fc)) +
                b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            // secant
            s = b - fb * (b - a) / (fb - fa);
        }

        const double lo = (3.0 * a + b) / 4.0;
        const bool out_of_range = (s < std::min(lo, b) || s > std::max(lo, b));
        const bool slow_progress =
            (used_bisection && std::abs(s - b) >= 0.5 * std::abs(b - c)) ||
            (!used_bisection && std::abs(s - b) >= 0.5 * std::abs(c - d));
        const bool bracket_tiny =
            (used_bisection && std::abs(b - c) < x_tol) ||
            (!used_bisection && std::abs(c - d) < x_tol);
        if (out_of_range || slow_progress || bracket_tiny) {
            s = 0.5 * (a + b);
            used_bisection = true;
        } else {
            used_bisection = false;
        }

        const double fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if (fa * fs < 0.0) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if (std::abs(fa) < std::abs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        if (std::abs(fb) <= f_tol || std::abs(b - a) <= x_tol)
            return {b, fb, iter, std::abs(fb) <= f_tol};
    }
    return {b, fb, max_iter, false};
}

MinimizeResult minimize_brent(const std::function<double(double)>& f, double a, double b,
                              double x_tol, int max_iter) {
    static const double golden = 0.5 * (3.0 - std::sqrt(5.0));
    if (!(a < b))
        throw ValidationError("minimize_brent: require a < b");

    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 1; iter <= max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol1 = x_tol * std::abs(x) + 1e-15;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a))
            return {x, fx, iter, true};

        bool parabolic = false;
        if (std::abs(e) > tol1) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (x < m) ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x < m) ? b - x : a - x;
            d = golden * e;
        }

        const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx, max_iter, false};
}

}  // namespace tmerton
