#include "tmerton/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>

#include "tmerton/paths.hpp"
#include "tmerton/pricing.hpp"
#include "tmerton/rng.hpp"
#include "tmerton/root_finding.hpp"

namespace tmerton {

namespace {

constexpr double kSigmaFloor = 1e-10;
constexpr double kSigmaCap = 64.0;
constexpr double kRhoFloor = 1e-9;

// Price at a report date as a function of sigma; rho cancels there.
double report_date_price(double sigma, const MarketObservation& obs, double r) {
    ModelParams p{obs.v_prime_observed, r, sigma, r, 1.0};
    return debt_price(p, obs.t, obs.t, obs.v_prime_observed, obs.claim);
}

// Intra-period price as a function of rho, with sigma fixed and the observed
// market value held constant while rho varies.
double intra_period_price(double rho, const MarketObservation& obs,
                          const ReportSchedule& schedule, double sigma, double r) {
    ModelParams p{obs.v_prime_observed, r, sigma, r, rho};
    const double t_k = schedule.period_containing(obs.t).start;
    return debt_price(p, obs.t, t_k, obs.v_prime_observed, obs.claim);
}

// Strict monotonicity scan before the solve; a violation aborts rather than
// letting the root finder return something from a non-monotone curve.
void assert_monotone(const std::function<double(double)>& price, double lo, double hi,
                     bool increasing, const char* what) {
    constexpr int kScan = 9;
    double prev = price(lo);
    double scale = std::abs(prev);
    for (int i = 1; i < kScan; ++i) {
        const double x = lo * std::pow(hi / lo, static_cast<double>(i) / (kScan - 1));
        const double cur = price(x);
        scale = std::max(scale, std::abs(cur));
        const double slack = 1e-12 * (1.0 + scale);
        const bool ok = increasing ? (cur >= prev - slack) : (cur <= prev + slack);
        if (!ok)
            throw NumericalError(std::string("calibration: price not monotone in ") + what +
                                 " over the bracket; aborting");
        prev = cur;
    }
}

double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace

void validate_observation(const MarketObservation& obs, double r) {
    if (!(obs.t >= 0.0) || !std::isfinite(obs.t))
        throw ValidationError("observation: time must be nonnegative");
    if (!(obs.price > 0.0) || !std::isfinite(obs.price))
        throw ValidationError("observation: price must be positive");
    if (!(obs.v_prime_observed > 0.0) || !std::isfinite(obs.v_prime_observed))
        throw ValidationError("observation: market firm value must be positive");
    if (!(obs.t < obs.claim.maturity))
        throw ValidationError("observation: time must precede the claim maturity");
    const double bound = obs.claim.face * std::exp(-r * (obs.claim.maturity - obs.t)) +
                         obs.v_prime_observed;
    if (!(obs.price < bound))
        throw ValidationError("observation: price " + fmt(obs.price) +
                              " violates the no-arbitrage bound " + fmt(bound));
}

double implied_sigma(const MarketObservation& obs, double r, double price_tol_rel,
                     BracketDiagnostics* diag) {
    validate_observation(obs, r);
    if (!obs.at_report_date)
        throw ValidationError("implied_sigma: observation must be at a report date");
    if (!(obs.claim.face > 0.0))
        throw ValidationError("implied_sigma: claim face must be positive");
    if (!(price_tol_rel > 0.0))
        throw ValidationError("implied_sigma: tolerance must be positive");

    const double tol = price_tol_rel * obs.claim.face;
    const double horizon = obs.claim.maturity - obs.t;
    const double riskless = std::min(obs.claim.face * std::exp(-r * horizon),
                                     obs.v_prime_observed);
    if (!(obs.price < riskless))
        throw NumericalError("implied_sigma: price " + fmt(obs.price) +
                             " is at or above the zero-volatility bound " + fmt(riskless));

    const auto price_of = [&](double s) { return report_date_price(s, obs, r); };

    double lo = kSigmaFloor;
    double hi = 0.5;
    while (price_of(hi) > obs.price && hi < kSigmaCap) hi *= 2.0;
    if (price_of(hi) > obs.price)
        throw NumericalError("implied_sigma: price " + fmt(obs.price) +
                             " below the attainable range even at sigma = " + fmt(hi));

    assert_monotone(price_of, lo, hi, /*increasing=*/false, "sigma");

    const auto f = [&](double s) { return price_of(s) - obs.price; };
    const RootResult root = find_root_brent(f, lo, hi, tol);
    if (!root.converged)
        throw NumericalError("implied_sigma: root finding did not converge; residual " +
                             fmt(root.f_at_x));

    if (diag) {
        diag->lower = lo;
        diag->upper = hi;
        diag->f_lower = f(lo);
        diag->f_upper = f(hi);
        diag->iterations = root.iterations;
        diag->residual = root.f_at_x;
        const double h = std::max(1e-6, 1e-4 * root.x);
        diag->sensitivity = central_difference(price_of, std::max(root.x, lo + h), h);
        diag->ill_conditioned = std::abs(diag->sensitivity) < 1e-6 * obs.claim.face;
        if (diag->ill_conditioned)
            diag->note = "flat price response: sigma determined only up to a wide interval";
    }
    return root.x;
}

double implied_rho(const MarketObservation& obs, const ReportSchedule& schedule, double sigma,
                   double r, double price_tol_rel, BracketDiagnostics* diag) {
    validate_observation(obs, r);
    if (obs.at_report_date)
        throw NumericalError(
            "implied_rho: ill-conditioned, a report-date price carries no information about rho");
    if (!(sigma > 0.0))
        throw ValidationError("implied_rho: sigma must be positive");
    if (!(obs.claim.face > 0.0))
        throw ValidationError("implied_rho: claim face must be positive");
    if (!(price_tol_rel > 0.0))
        throw ValidationError("implied_rho: tolerance must be positive");

    const double tol = price_tol_rel * obs.claim.face;
    const auto price_of = [&](double rho) {
        return intra_period_price(rho, obs, schedule, sigma, r);
    };

    const auto fill_sensitivity = [&](double rho_at) {
        if (!diag) return;
        const double h = std::min(1e-5, 0.5 * (1.0 - kRhoFloor));
        const double x = std::clamp(rho_at, kRhoFloor + h, 1.0 - h);
        diag->sensitivity = central_difference(price_of, x, h);
        diag->ill_conditioned = std::abs(diag->sensitivity) < 1e-6 * obs.claim.face;
        if (diag->ill_conditioned)
            diag->note = "price nearly insensitive to rho (observation too close to a report "
                         "date); estimate is weakly identified";
    };

    const double at_one = price_of(1.0);
    if (std::abs(obs.price - at_one) <= tol) {
        if (diag) {
            diag->lower = kRhoFloor;
            diag->upper = 1.0;
            diag->residual = at_one - obs.price;
            diag->note = "price attained at the full-transparency boundary";
            fill_sensitivity(1.0);
        }
        return 1.0;
    }
    if (obs.price > at_one)
        throw NumericalError("implied_rho: price " + fmt(obs.price) +
                             " exceeds the full-transparency value " + fmt(at_one));
    const double at_zero = price_of(kRhoFloor);
    if (obs.price <= at_zero)
        throw NumericalError("implied_rho: price " + fmt(obs.price) +
                             " is at or below the opaque limit " + fmt(at_zero));

    assert_monotone(price_of, kRhoFloor, 1.0, /*increasing=*/true, "rho");

    const auto f = [&](double rho) { return price_of(rho) - obs.price; };
    const RootResult root = find_root_brent(f, kRhoFloor, 1.0, tol);
    if (!root.converged)
        throw NumericalError("implied_rho: root finding did not converge; residual " +
                             fmt(root.f_at_x));

    if (diag) {
        diag->lower = kRhoFloor;
        diag->upper = 1.0;
        diag->f_lower = at_zero - obs.price;
        diag->f_upper = at_one - obs.price;
        diag->iterations = root.iterations;
        diag->residual = root.f_at_x;
        fill_sensitivity(root.x);
    }
    return root.x;
}

SpreadDecomposition decompose_spread(const MarketObservation& obs,
                                     const ReportSchedule& schedule, double sigma_hat,
                                     double rho_hat, double r) {
    validate_observation(obs, r);
    if (!(sigma_hat > 0.0))
        throw ValidationError("decompose_spread: sigma must be positive");
    if (!(rho_hat > 0.0) || !(rho_hat <= 1.0))
        throw ValidationError("decompose_spread: rho must lie in (0, 1]");

    const double t_k = schedule.period_containing(obs.t).start;
    ModelParams with_rho{obs.v_prime_observed, r, sigma_hat, r, rho_hat};
    ModelParams full{obs.v_prime_observed, r, sigma_hat, r, 1.0};

    const double price_rho = debt_price(with_rho, obs.t, t_k, obs.v_prime_observed, obs.claim);
    const double price_full = debt_price(full, obs.t, t_k, obs.v_prime_observed, obs.claim);
    const double spread_rho = credit_spread_from_price(price_rho, obs.claim, obs.t, r);
    const double spread_full = credit_spread_from_price(price_full, obs.claim, obs.t, r);

    SpreadDecomposition out;
    out.default_component = spread_full;
    out.transparency_component = spread_rho - spread_full;
    out.total = out.default_component + out.transparency_component;
    return out;
}

CalibrationResult calibrate(const std::vector<MarketObservation>& observations,
                            const ReportSchedule& schedule, double r, double price_tol_rel) {
    if (observations.empty())
        throw ValidationError("calibrate: no observations");
    for (const MarketObservation& obs : observations) validate_observation(obs, r);
    const DebtClaim& claim = observations.front().claim;
    for (const MarketObservation& obs : observations)
        if (obs.claim.face != claim.face || obs.claim.maturity != claim.maturity)
            throw ValidationError("calibrate: all observations must refer to the same claim");

    std::vector<const MarketObservation*> report_rows, mid_rows;
    for (const MarketObservation& obs : observations)
        (obs.at_report_date ? report_rows : mid_rows).push_back(&obs);
    if (report_rows.empty())
        throw ValidationError("calibrate: at least one report-date observation is required "
                              "to identify sigma");

    CalibrationResult result;

    if (report_rows.size() == 1) {
        result.sigma_hat =
            implied_sigma(*report_rows.front(), r, price_tol_rel, &result.sigma_diagnostics);
    } else {
        const auto sse = [&](double s) {
            double acc = 0.0;
            for (const MarketObservation* obs : report_rows) {
                const double e = report_date_price(s, *obs, r) - obs->price;
                acc += e * e;
            }
            return acc;
        };
        const MinimizeResult min = minimize_brent(sse, kSigmaFloor, 4.0, 1e-12);
        if (!min.converged)
            throw NumericalError("calibrate: sigma least-squares did not converge");
        result.sigma_hat = min.x;
        result.sigma_diagnostics.lower = kSigmaFloor;
        result.sigma_diagnostics.upper = 4.0;
        result.sigma_diagnostics.iterations = min.iterations;
        result.sigma_diagnostics.residual = std::sqrt(min.f_at_x / report_rows.size());
        double sens = 0.0;
        for (const MarketObservation* obs : report_rows)
            sens += central_difference(
                [&](double s) { return report_date_price(s, *obs, r); },
                std::max(min.x, kSigmaFloor + 1e-6), 1e-6);
        result.sigma_diagnostics.sensitivity = sens / report_rows.size();
        result.sigma_diagnostics.ill_conditioned =
            std::abs(result.sigma_diagnostics.sensitivity) < 1e-6 * claim.face;
        result.sigma_diagnostics.note = "least squares over " +
                                        std::to_string(report_rows.size()) +
                                        " report-date rows";
    }

    if (mid_rows.empty()) {
        result.rho_hat.reset();
        result.rho_diagnostics.note = "no intra-period observations: rho unidentified";
    } else if (mid_rows.size() == 1) {
        result.rho_hat = implied_rho(*mid_rows.front(), schedule, result.sigma_hat, r,
                                     price_tol_rel, &result.rho_diagnostics);
    } else {
        const auto sse = [&](double rho) {
            double acc = 0.0;
            for (const MarketObservation* obs : mid_rows) {
                const double e =
                    intra_period_price(rho, *obs, schedule, result.sigma_hat, r) - obs->price;
                acc += e * e;
            }
            return acc;
        };
        const MinimizeResult min = minimize_brent(sse, kRhoFloor, 1.0, 1e-12);
        if (!min.converged)
            throw NumericalError("calibrate: rho least-squares did not converge");
        result.rho_hat = std::min(1.0, min.x);
        result.rho_diagnostics.lower = kRhoFloor;
        result.rho_diagnostics.upper = 1.0;
        result.rho_diagnostics.iterations = min.iterations;
        result.rho_diagnostics.residual = std::sqrt(min.f_at_x / mid_rows.size());
        double sens = 0.0;
        const double x = std::clamp(*result.rho_hat, kRhoFloor + 1e-5, 1.0 - 1e-5);
        for (const MarketObservation* obs : mid_rows)
            sens += central_difference(
                [&](double rho) {
                    return intra_period_price(rho, *obs, schedule, result.sigma_hat, r);
                },
                x, 1e-5);
        result.rho_diagnostics.sensitivity = sens / mid_rows.size();
        result.rho_diagnostics.ill_conditioned =
            std::abs(result.rho_diagnostics.sensitivity) < 1e-6 * claim.face;
        result.rho_diagnostics.note = "least squares over " + std::to_string(mid_rows.size()) +
                                      " intra-period rows";
    }

    result.residuals.reserve(observations.size());
    for (const MarketObservation& obs : observations) {
        if (obs.at_report_date) {
            result.residuals.push_back(report_date_price(result.sigma_hat, obs, r) - obs.price);
        } else if (result.rho_hat) {
            result.residuals.push_back(
                intra_period_price(*result.rho_hat, obs, schedule, result.sigma_hat, r) -
                obs.price);
        } else {
            result.residuals.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return result;
}

SyntheticMarket generate_synthetic_market(const ModelParams& params,
                                          const ReportSchedule& schedule,
                                          const DebtClaim& claim,
                                          const std::vector<double>& observation_times,
                                          double noise_rel_sd, std::uint64_t seed) {
    params.validate();
    validate_claim(claim, schedule);
    if (observation_times.empty())
        throw ValidationError("synthetic market: at least one observation time required");
    for (double t : observation_times)
        if (!(t >= 0.0) || !(t < claim.maturity))
            throw ValidationError("synthetic market: observation times must lie in "
                                  "[0, maturity)");
    if (noise_rel_sd < 0.0)
        throw ValidationError("synthetic market: noise level must be nonnegative");

    std::vector<double> grid;
    for (double d : schedule.dates())
        if (d <= claim.maturity) grid.push_back(d);
    grid.insert(grid.end(), observation_times.begin(), observation_times.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    PathSampler sampler(params, schedule, grid, Measure::P, mix_seed(seed, 0x6d6b74));
    const PathBundle path = sampler.sample(0);
    NormalSampler noise_gen(mix_seed(seed, 0x6e6f6973));

    SyntheticMarket market;
    market.generating_params = params;
    market.seed = seed;
    market.observations.reserve(observation_times.size());
    for (double t : observation_times) {
        const std::size_t node = static_cast<std::size_t>(
            std::lower_bound(grid.begin(), grid.end(), t) - grid.begin());
        const double v_prime = path.v_filtered[node];
        const double t_k = schedule.period_containing(t).start;
        double price = debt_price(params, t, t_k, v_prime, claim);
        if (noise_rel_sd > 0.0)
            price *= std::exp(noise_rel_sd * noise_gen.normal() -
                              0.5 * noise_rel_sd * noise_rel_sd);
        market.observations.push_back(
            {t, price, schedule.contains(t), claim, v_prime});
    }
    return market;
}

}  // namespace tmerton
