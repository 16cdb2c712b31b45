#include "tmerton/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "tmerton/rng.hpp"

namespace tmerton {

PathSampler::PathSampler(ModelParams params, ReportSchedule schedule, std::vector<double> grid,
                         Measure measure, std::uint64_t seed)
    : params_(std::move(params)),
      schedule_(std::move(schedule)),
      grid_(std::move(grid)),
      measure_(measure),
      seed_(seed) {
    params_.validate();
    if (grid_.empty() || grid_.front() != 0.0)
        throw ValidationError("path grid: must start at 0");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!std::isfinite(grid_[i]) || !(grid_[i] > grid_[i - 1]))
            throw ValidationError("path grid: times must be strictly increasing");

    for (double d : schedule_.dates()) {
        if (d > 0.0 && d <= grid_.back() &&
            !std::binary_search(grid_.begin(), grid_.end(), d))
            throw ValidationError("path grid: report date " + std::to_string(d) +
                                  " missing from the grid");
    }

    theta_ = params_.theta();
    sqrt_one_minus_rho2_ = std::sqrt((1.0 - params_.rho) * (1.0 + params_.rho));

    is_report_node_.assign(grid_.size(), false);
    sqrt_dt_.assign(grid_.size(), 0.0);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        is_report_node_[i] = schedule_.contains(grid_[i]);
        if (i > 0) sqrt_dt_[i] = std::sqrt(grid_[i] - grid_[i - 1]);
    }
}

void PathSampler::sample_into(std::size_t path_index, PathBundle& out) const {
    const std::size_t m = grid_.size();
    out.grid = grid_;
    out.measure = measure_;
    out.seed = mix_seed(seed_, path_index);
    out.w.assign(m, 0.0);
    out.w_prime.assign(m, 0.0);
    out.v.assign(m, 0.0);
    out.v_filtered.assign(m, 0.0);
    out.z.assign(m, 0.0);

    NormalSampler gen(out.seed);

    out.v[0] = params_.v0;
    out.v_filtered[0] = params_.v0;
    out.z[0] = 1.0;

    double anchor_t = 0.0;
    double anchor_v = params_.v0;
    double anchor_wp = 0.0;

    for (std::size_t i = 1; i < m; ++i) {
        const double dt = grid_[i] - grid_[i - 1];
        const double dw_tilde = sqrt_dt_[i] * gen.normal();
        const double dw_pp = sqrt_dt_[i] * gen.normal();
        const double dw_p = dw_tilde + (measure_ == Measure::Q ? theta_ * dt : 0.0);

        out.w_prime[i] = out.w_prime[i - 1] + dw_p;
        out.w[i] = out.w[i - 1] + params_.rho * dw_p + sqrt_one_minus_rho2_ * dw_pp;
        out.v[i] = firm_value(params_, grid_[i], out.w[i]);
        out.z[i] = state_price_density(params_, grid_[i], out.w_prime[i]);

        if (is_report_node_[i]) {
            out.v_filtered[i] = out.v[i];
            anchor_t = grid_[i];
            anchor_v = out.v[i];
            anchor_wp = out.w_prime[i];
        } else {
            out.v_filtered[i] = filtered_step(params_, grid_[i] - anchor_t, anchor_v,
                                              out.w_prime[i] - anchor_wp);
        }
    }
}

PathBundle PathSampler::sample(std::size_t path_index) const {
    PathBundle out;
    sample_into(path_index, out);
    return out;
}

std::vector<PathBundle> sample_paths(const ModelParams& params, const ReportSchedule& schedule,
                                     const std::vector<double>& grid, std::size_t n_paths,
                                     Measure measure, std::uint64_t seed) {
    if (n_paths == 0)
        throw ValidationError("sample_paths: at least one path required");
    PathSampler sampler(params, schedule, grid, measure, seed);
    std::vector<PathBundle> out(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        sampler.sample_into(i, out[i]);
    return out;
}

}  // namespace tmerton
