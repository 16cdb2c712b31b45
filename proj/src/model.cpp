#include "tmerton/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tmerton {

void ModelParams::validate() const {
    if (!std::isfinite(v0) || !(v0 > 0.0))
        throw ValidationError("model params: v0 must be positive and finite");
    if (!std::isfinite(mu))
        throw ValidationError("model params: mu must be finite");
    if (!std::isfinite(sigma) || sigma < 0.0)
        throw ValidationError("model params: sigma must be nonnegative and finite");
    if (!std::isfinite(r))
        throw ValidationError("model params: r must be finite");
    if (!std::isfinite(rho) || !(rho > 0.0) || !(rho <= 1.0))
        throw ValidationError("model params: rho must lie in (0, 1]");
}

double ModelParams::theta() const {
    const double sr = sigma * rho;
    if (sr == 0.0)
        throw NumericalError("theta undefined: sigma * rho == 0");
    const double th = -(mu - r) / sr;
    if (!std::isfinite(th))
        throw NumericalError("theta is not finite");
    return th;
}

ReportSchedule::ReportSchedule(std::vector<double> dates) : dates_(std::move(dates)) {
    if (dates_.empty())
        throw ValidationError("report schedule: at least one date required");
    if (dates_.front() != 0.0)
        throw ValidationError("report schedule: first date must be 0");
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!std::isfinite(dates_[i]) || !(dates_[i] > dates_[i - 1]))
            throw ValidationError("report schedule: dates must be strictly increasing");
    }
}

bool ReportSchedule::contains(double t) const {
    return std::binary_search(dates_.begin(), dates_.end(), t);
}

ReportSchedule::Period ReportSchedule::period_containing(double t) const {
    if (!(t >= 0.0))
        throw ValidationError("schedule lookup: time must be nonnegative");
    auto it = std::upper_bound(dates_.begin(), dates_.end(), t);
    if (it == dates_.end())
        throw ValidationError("schedule lookup: time " + std::to_string(t) +
                              " is at or beyond the last report date");
    const std::size_t k = static_cast<std::size_t>(it - dates_.begin()) - 1;
    return {dates_[k], *it, k};
}

void validate_claim(const DebtClaim& claim, const ReportSchedule& schedule) {
    if (!std::isfinite(claim.face) || claim.face < 0.0)
        throw ValidationError("debt claim: face must be nonnegative");
    if (!schedule.contains(claim.maturity))
        throw ValidationError("debt claim: maturity must be a report date");
    if (claim.maturity <= 0.0)
        throw ValidationError("debt claim: maturity must be positive");
}

double firm_value(const ModelParams& p, double t, double w_t) {
    if (!(t >= 0.0))
        throw ValidationError("firm_value: time must be nonnegative");
    return p.v0 * std::exp((p.mu - 0.5 * p.sigma * p.sigma) * t + p.sigma * w_t);
}

double filtered_step(const ModelParams& p, double dt, double v_at_last_report,
                     double wprime_increment) {
    const double sr = p.sigma * p.rho;
    return v_at_last_report * std::exp((p.mu - 0.5 * sr * sr) * dt + sr * wprime_increment);
}

double filtered_value(const ModelParams& p, const ReportSchedule& schedule, double t,
                      double v_at_last_report, double wprime_increment) {
    if (!(v_at_last_report > 0.0))
        throw ValidationError("filtered_value: anchor value must be positive");
    const auto period = schedule.period_containing(t);
    return filtered_step(p, t - period.start, v_at_last_report, wprime_increment);
}

double state_price_density(const ModelParams& p, double t, double wprime_t) {
    if (!(t >= 0.0))
        throw ValidationError("state_price_density: time must be nonnegative");
    const double th = p.theta();
    return std::exp(th * wprime_t - 0.5 * th * th * t - p.r * t);
}

}  // namespace tmerton
