#pragma once

#include <functional>

#include "tmerton/model.hpp"
#include "tmerton/normal.hpp"
#include "tmerton/quadrature.hpp"

namespace tmerton {

// Effective drift and volatility of the terminal firm value seen from an
// intra-period valuation time s in [t_k, t_n], for a claim settling at the
// report date t_n (t_k = last report date at or before s):
//
//   tau(s) = -sigma^2/2 (t_n - t_k) + (sigma rho)^2/2 (s - t_k) + r (t_n - s)
//   nu(s)  = sigma sqrt((t_n - t_k) - rho^2 (s - t_k))
//
// Given the market information at s, V_{t_n} = V'_s exp(tau + nu Z) with Z
// standard normal under the pricing measure. At s = t_k both reduce to the
// fully observed case and no longer involve rho.
struct TauNu {
    double tau = 0.0;
    double nu = 0.0;
};

TauNu tau_nu(const ModelParams&, double t_k, double s, double t_n);

// Valuation state: time t inside [t_k, t_{k+1}), the firm value at the last
// report date, and the observable-noise increment since then. At a report
// date the increment must be 0 and the market value equals the anchor.
struct PricingContext {
    ModelParams params;
    ReportSchedule schedule;
    double t = 0.0;
    double last_report_value = 0.0;
    double wprime_increment = 0.0;

    void validate() const;
    ReportSchedule::Period period() const { return schedule.period_containing(t); }
    double filtered_value() const;
};

// Price of a claim f(V_{t_n}) settling at report date t_n, valued at time t
// with bracketing report date t_k and market firm value v_prime:
//
//   price = e^{-r (t_n - t)} E[ f(v_prime e^{tau + nu Z}) ],  Z ~ N(0,1)
//
// evaluated by deterministic quadrature to the configured absolute
// tolerance. The payoff should be bounded and piecewise continuous.
double price_claim_quadrature(const ModelParams&, double t, double t_k, double v_prime,
                              const std::function<double(double)>& payoff, double t_n,
                              const QuadratureConfig& = {});
double price_claim_quadrature(const PricingContext&, const std::function<double(double)>& payoff,
                              double t_n, const QuadratureConfig& = {});

// Closed form for the debt payoff min(face, V_maturity). With
// h = maturity - t, (tau, nu) as above and
//
//   d = (log(face / v_prime) - r h - nu^2/2) / nu
//
//   debt = v_prime Phi(d) + face e^{-r h} Phi(-d - nu)
//        = face e^{-r h} - [put struck at face with total volatility nu]
//
// At a report date nu = sigma sqrt(maturity - t) and d reduces to the
// classical Merton expression with the reported firm value as anchor; rho
// drops out entirely. Degenerate nu = 0 collapses to the point-mass price
// e^{-r h} min(face, v_prime e^{tau}).
double debt_price(const ModelParams&, double t, double t_k, double v_prime, const DebtClaim&);
double debt_price_closed_form(const PricingContext&, const DebtClaim&);

// Complementary equity value (call on the firm value struck at the face):
//   equity = v_prime Phi(-d) - face e^{-r h} Phi(-d - nu)
// so that equity + debt == v_prime identically.
double equity_price(const ModelParams&, double t, double t_k, double v_prime, const DebtClaim&);
double equity_price_closed_form(const PricingContext&, const DebtClaim&);

// Continuously compounded yield spread over r implied by a debt price:
//   s = -log(price / face) / (maturity - t) - r
double credit_spread_from_price(double price, const DebtClaim&, double t, double r);
double credit_spread(const PricingContext&, const DebtClaim&);

}  // namespace tmerton
