#pragma once

#include <cstddef>
#include <vector>

#include "tmerton/errors.hpp"

namespace tmerton {

// Parameters of the partially observed firm-value model.
//
// The true firm value V follows a geometric Brownian motion driven by a
// Wiener process W. The market continuously observes a second Wiener process
// W' with d<W, W'> = rho dt, and additionally sees the exact firm value at
// discrete report dates. rho in (0, 1] measures how transparent the firm is
// between reports; rho = 1 is the fully observed classical limit.
struct ModelParams {
    double v0 = 0.0;     // initial firm value, > 0
    double mu = 0.0;     // real-world drift, per year
    double sigma = 0.0;  // firm-value volatility, per sqrt(year), >= 0
    double r = 0.0;      // risk-free rate, per year
    double rho = 0.0;    // transparency parameter, in (0, 1]

    void validate() const;

    // Market price of risk of the observable noise: -(mu - r) / (sigma*rho).
    // Throws NumericalError when sigma * rho == 0.
    double theta() const;
};

// Strictly increasing report dates t_0 = 0 < t_1 < t_2 < ...
class ReportSchedule {
public:
    struct Period {
        double start = 0.0;      // t_k
        double end = 0.0;        // t_{k+1}
        std::size_t index = 0;   // k
    };

    explicit ReportSchedule(std::vector<double> dates);

    const std::vector<double>& dates() const { return dates_; }

    // Exact membership: is t one of the report dates?
    bool contains(double t) const;

    // The bracketing pair with t_k <= t < t_{k+1}. Throws for t < 0 and for
    // t at or beyond the last date.
    Period period_containing(double t) const;

private:
    std::vector<double> dates_;
};

// A single zero-coupon debt claim. Its maturity must be a report date; only
// the nearest-maturity debt is modelled, so default can happen only at
// maturity and the payoff is min(face, V_maturity).
struct DebtClaim {
    double face = 0.0;
    double maturity = 0.0;
};

void validate_claim(const DebtClaim&, const ReportSchedule&);

// True firm value V_t = v0 * exp((mu - sigma^2/2) t + sigma W_t).
double firm_value(const ModelParams&, double t, double w_t);

// Market estimate of the firm value between reports, re-anchored to the true
// value at each report date:
//   V'_t = V_{t_k} * exp((mu - (sigma rho)^2/2)(t - t_k) + sigma rho (W'_t - W'_{t_k}))
// The step form takes dt = t - t_k directly; the schedule form looks up t_k.
double filtered_step(const ModelParams&, double dt, double v_at_last_report,
                     double wprime_increment);
double filtered_value(const ModelParams&, const ReportSchedule&, double t,
                      double v_at_last_report, double wprime_increment);

// State-price density Z_t = exp(theta W'_t - theta^2 t / 2 - r t); Z_0 = 1.
double state_price_density(const ModelParams&, double t, double wprime_t);

}  // namespace tmerton
