#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmerton/model.hpp"

namespace tmerton {

// One observed debt price together with the firm's market value (total stock
// value) at the same instant.
struct MarketObservation {
    double t = 0.0;
    double price = 0.0;
    bool at_report_date = false;
    DebtClaim claim{};
    double v_prime_observed = 0.0;
};

// Sanity checks including the no-arbitrage bound
// price < face e^{-r (maturity - t)} + v_prime.
void validate_observation(const MarketObservation&, double r);

struct BracketDiagnostics {
    double lower = 0.0, upper = 0.0;
    double f_lower = 0.0, f_upper = 0.0;
    int iterations = 0;
    double residual = 0.0;     // model price minus market price at the solution
    double sensitivity = 0.0;  // d(price)/d(parameter) at the solution
    bool ill_conditioned = false;
    std::string note;
};

// Stage one: sigma from a report-date price. The report-date formula does
// not involve rho, and the price is strictly decreasing in sigma, so the
// root is bracketed and unique. Tolerance is |price error| <= tol_rel * face.
double implied_sigma(const MarketObservation&, double r, double price_tol_rel = 1e-10,
                     BracketDiagnostics* = nullptr);

// Stage two: rho from an intra-period price given sigma. The price is
// strictly increasing in rho on (0, 1]; a price within tolerance of the
// rho = 1 value returns exactly 1.
double implied_rho(const MarketObservation&, const ReportSchedule&, double sigma, double r,
                   double price_tol_rel = 1e-10, BracketDiagnostics* = nullptr);

// Spread split at one observation: the default component is the spread the
// same firm would show under full transparency (rho = 1, same sigma, same
// market value); the transparency component is the remainder. The reported
// total is their exact floating-point sum.
struct SpreadDecomposition {
    double total = 0.0;
    double default_component = 0.0;
    double transparency_component = 0.0;
};
SpreadDecomposition decompose_spread(const MarketObservation&, const ReportSchedule&,
                                     double sigma_hat, double rho_hat, double r);

struct CalibrationResult {
    double sigma_hat = 0.0;
    std::optional<double> rho_hat;  // empty when no intra-period data identifies rho
    std::vector<double> residuals;  // model minus market, aligned with the input rows
    BracketDiagnostics sigma_diagnostics;
    BracketDiagnostics rho_diagnostics;
};

// Two-stage calibration over a set of observations of one claim: sigma from
// the report-date rows, then rho from the intra-period rows. A single row
// solves a bracketed root problem; several rows minimize the sum of squared
// price errors in one dimension.
CalibrationResult calibrate(const std::vector<MarketObservation>&, const ReportSchedule&,
                            double r, double price_tol_rel = 1e-10);

struct SyntheticMarket {
    std::vector<MarketObservation> observations;
    ModelParams generating_params;
    std::uint64_t seed = 0;
};

// Simulates one real-world path, prices the claim at each observation time
// from the model's own market value, and optionally perturbs the prices with
// mean-one lognormal noise of the given relative standard deviation.
SyntheticMarket generate_synthetic_market(const ModelParams&, const ReportSchedule&,
                                          const DebtClaim&,
                                          const std::vector<double>& observation_times,
                                          double noise_rel_sd, std::uint64_t seed);

}  // namespace tmerton
