#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tmerton/model.hpp"
#include "tmerton/paths.hpp"
#include "tmerton/pricing.hpp"

namespace tmerton {

struct McConfig {
    std::size_t n_paths = 1'000'000;
    std::size_t batch = 16'384;
    std::uint64_t seed = 0;
    std::vector<double> grid;  // used by the grid-based checks
    unsigned threads = 0;      // 0 = hardware concurrency

    void validate() const;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

// The same price estimated twice: E[Z_T X] under the real-world measure and
// e^{-rT} E[X] under the pricing measure, from common random numbers. Their
// paired difference has zero mean when the measure change is implemented
// correctly; a |z| > 3 difference is flagged as a model inconsistency.
struct DualEstimate {
    McEstimate z_weighted_p;
    McEstimate discounted_q;
    double difference = 0.0;
    double difference_std_error = 0.0;
    double difference_z = 0.0;
    bool consistent = false;
};

// Payoff on the firm values at the report dates in (0, t_n], ordered by
// date; the last element is the value at settlement.
using ReportPayoff = std::function<double(std::span<const double>)>;

// Price at time 0 of a payoff settling at report date t_n.
DualEstimate mc_price(const ModelParams&, const ReportSchedule&, const ReportPayoff&,
                      double t_n, const McConfig&);

// Price conditional on an intra-period market state (anchor value plus
// observable-noise increment): simulates the raw increments forward, never
// the closed-form transition, so it is an independent check of the pricing
// formulas away from report dates.
DualEstimate mc_price_from_state(const PricingContext&,
                                 const std::function<double(double)>& terminal_payoff,
                                 double t_n, const McConfig&);

struct CheckLine {
    std::string label;
    double estimate = 0.0;   // statistic whose expectation should be 0
    double std_error = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct CheckReport {
    std::string name;
    std::vector<CheckLine> lines;
    bool passed = false;

    double max_abs_z() const;
    std::string to_text() const;  // one machine-readable line per statistic
};

// Fault injection for the negative controls of the statistical suite. Each
// control corrupts one ingredient of the path construction and must be
// rejected loudly (|z| > 5) by at least one statistic.
enum class NegativeControl { none, flipped_theta, wrong_filter_rho, wrong_drift };

// Discounted filtered value as a martingale under the pricing measure:
// E[V'_t e^{-rt}] = v0 at every grid time, plus orthogonality of increments
// against instruments known at the earlier time (constant, W'_s, last
// reported value).
CheckReport check_martingale_filtered_value(const ModelParams&, const ReportSchedule&,
                                            const McConfig&,
                                            NegativeControl = NegativeControl::none);

// The filtered value as a conditional expectation of the true value: paths
// are binned on (reported value, observable increment) and the bin mean of
// V_t - V'_t must vanish within 3 standard errors, bin by bin.
CheckReport check_filtering_identity(const ModelParams&, const ReportSchedule&,
                                     const McConfig&);

enum class ReplicationPayoffKind {
    market_measurable,  // payoff already determined just before the report
    terminal_value,     // payoff V at the report date
    debt_payoff         // min(face, V) at the report date
};

// Replication-cost equivalence: the price of X equals the price of its
// projection K* = E[X | information just before settlement], estimated from
// the same paths with the projection evaluated in closed form.
CheckReport check_replication_cost(const ModelParams&, const ReportSchedule&,
                                   ReplicationPayoffKind, const DebtClaim&, const McConfig&);

}  // namespace tmerton
