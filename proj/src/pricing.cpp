#include "tmerton/pricing.hpp"

#include <cmath>

namespace tmerton {

namespace {

void validate_state(const ModelParams& p, double t, double t_k, double v_prime,
                    double maturity) {
    p.validate();
    if (!(t_k >= 0.0) || !(t >= t_k))
        throw ValidationError("pricing: require 0 <= t_k <= t");
    if (!(t < maturity))
        throw ValidationError("pricing: valuation time must precede maturity");
    if (!(v_prime > 0.0) || !std::isfinite(v_prime))
        throw ValidationError("pricing: market firm value must be positive");
}

}  // namespace

TauNu tau_nu(const ModelParams& p, double t_k, double s, double t_n) {
    if (!(t_k <= s) || !(s <= t_n))
        throw ValidationError("tau_nu: require t_k <= s <= t_n");
    const double sr = p.sigma * p.rho;
    const double tau = -0.5 * p.sigma * p.sigma * (t_n - t_k) +
                       0.5 * sr * sr * (s - t_k) + p.r * (t_n - s);
    double radicand = (t_n - t_k) - p.rho * p.rho * (s - t_k);
    if (radicand < 0.0) {
        if (radicand < -1e-12 * (t_n - t_k))
            throw NumericalError("tau_nu: negative variance radicand");
        radicand = 0.0;  // clip rounding residue at s ~ t_n, rho ~ 1
    }
    return {tau, p.sigma * std::sqrt(radicand)};
}

void PricingContext::validate() const {
    params.validate();
    if (!(t >= 0.0))
        throw ValidationError("pricing context: valuation time must be nonnegative");
    if (!(last_report_value > 0.0) || !std::isfinite(last_report_value))
        throw ValidationError("pricing context: last report value must be positive");
    if (schedule.contains(t) && wprime_increment != 0.0)
        throw ValidationError(
            "pricing context: observable-noise increment must be zero at a report date");
}

double PricingContext::filtered_value() const {
    return tmerton::filtered_value(params, schedule, t, last_report_value, wprime_increment);
}

double price_claim_quadrature(const ModelParams& p, double t, double t_k, double v_prime,
                              const std::function<double(double)>& payoff, double t_n,
                              const QuadratureConfig& qc) {
    validate_state(p, t, t_k, v_prime, t_n);
    if (!payoff)
        throw ValidationError("price_claim_quadrature: payoff must be callable");
    const auto tn = tau_nu(p, t_k, t, t_n);
    const double disc = std::exp(-p.r * (t_n - t));
    if (tn.nu == 0.0)
        return disc * payoff(v_prime * std::exp(tn.tau));
    const auto g = [&](double z) { return payoff(v_prime * std::exp(tn.tau + tn.nu * z)); };
    std::vector<double> z_breakpoints;
    for (double b : qc.payoff_breakpoints)
        if (b > 0.0) z_breakpoints.push_back((std::log(b / v_prime) - tn.tau) / tn.nu);
    return disc * gaussian_expectation(g, qc, z_breakpoints);
}

double price_claim_quadrature(const PricingContext& ctx,
                              const std::function<double(double)>& payoff, double t_n,
                              const QuadratureConfig& qc) {
    ctx.validate();
    if (!ctx.schedule.contains(t_n))
        throw ValidationError("price_claim_quadrature: settlement time must be a report date");
    const auto period = ctx.period();
    if (!(period.end <= t_n))
        throw ValidationError(
            "price_claim_quadrature: settlement must not precede the end of the current period");
    return price_claim_quadrature(ctx.params, ctx.t, period.start, ctx.filtered_value(),
                                  payoff, t_n, qc);
}

double debt_price(const ModelParams& p, double t, double t_k, double v_prime,
                  const DebtClaim& claim) {
    validate_state(p, t, t_k, v_prime, claim.maturity);
    if (claim.face < 0.0)
        throw ValidationError("debt_price: face must be nonnegative");
    if (claim.face == 0.0) return 0.0;

    const double h = claim.maturity - t;
    const double disc = std::exp(-p.r * h);
    const auto tn = tau_nu(p, t_k, t, claim.maturity);
    if (tn.nu == 0.0)
        return disc * std::min(claim.face, v_prime * std::exp(tn.tau));

    const double d = (std::log(claim.face / v_prime) - p.r * h - 0.5 * tn.nu * tn.nu) / tn.nu;
    return v_prime * normal_cdf(d) + claim.face * disc * normal_cdf(-d - tn.nu);
}

double debt_price_closed_form(const PricingContext& ctx, const DebtClaim& claim) {
    ctx.validate();
    validate_claim(claim, ctx.schedule);
    return debt_price(ctx.params, ctx.t, ctx.period().start, ctx.filtered_value(), claim);
}

double equity_price(const ModelParams& p, double t, double t_k, double v_prime,
                    const DebtClaim& claim) {
    validate_state(p, t, t_k, v_prime, claim.maturity);
    if (claim.face < 0.0)
        throw ValidationError("equity_price: face must be nonnegative");
    if (claim.face == 0.0) return v_prime;

    const double h = claim.maturity - t;
    const double disc = std::exp(-p.r * h);
    const auto tn = tau_nu(p, t_k, t, claim.maturity);
    if (tn.nu == 0.0)
        return disc * std::max(v_prime * std::exp(tn.tau) - claim.face, 0.0);

    const double d = (std::log(claim.face / v_prime) - p.r * h - 0.5 * tn.nu * tn.nu) / tn.nu;
    return v_prime * normal_cdf(-d) - claim.face * disc * normal_cdf(-d - tn.nu);
}

double equity_price_closed_form(const PricingContext& ctx, const DebtClaim& claim) {
    ctx.validate();
    validate_claim(claim, ctx.schedule);
    return equity_price(ctx.params, ctx.t, ctx.period().start, ctx.filtered_value(), claim);
}

double credit_spread_from_price(double price, const DebtClaim& claim, double t, double r) {
    if (!(claim.face > 0.0))
        throw ValidationError("credit_spread: face must be positive");
    if (!(t < claim.maturity))
        throw ValidationError("credit_spread: valuation time must precede maturity");
    if (!(price > 0.0))
        throw NumericalError("credit_spread: non-positive debt price");
    return -std::log(price / claim.face) / (claim.maturity - t) - r;
}

double credit_spread(const PricingContext& ctx, const DebtClaim& claim) {
    const double price = debt_price_closed_form(ctx, claim);
    return credit_spread_from_price(price, claim, ctx.t, ctx.params.r);
}

}  // namespace tmerton
