#pragma once

#include <cstdint>
#include <vector>

#include "tmerton/model.hpp"

namespace tmerton {

enum class Measure { P, Q };

// One discretized joint sample of (W, W', V, V', Z) on a shared time grid.
// The filtered value re-anchors to the true value at every report date on
// the grid.
struct PathBundle {
    std::vector<double> grid;
    std::vector<double> w, w_prime, v, v_filtered, z;
    Measure measure = Measure::P;
    std::uint64_t seed = 0;  // substream seed this path was drawn from
};

// Exact lognormal stepping at the grid nodes; there is no Euler bias. Under
// Q the observable noise is produced as a drifted Wiener process
// (W' = W~ + theta t), so every pathwise formula applies unchanged. Path i
// is a pure function of (seed, i): sampling is reproducible and
// embarrassingly parallel.
//
// The grid must start at 0, increase strictly, and contain every report
// date inside its span so the filtered value can re-anchor.
class PathSampler {
public:
    PathSampler(ModelParams params, ReportSchedule schedule, std::vector<double> grid,
                Measure measure, std::uint64_t seed);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<bool>& is_report_node() const { return is_report_node_; }
    Measure measure() const { return measure_; }

    void sample_into(std::size_t path_index, PathBundle& out) const;
    PathBundle sample(std::size_t path_index) const;

private:
    ModelParams params_;
    ReportSchedule schedule_;
    std::vector<double> grid_;
    Measure measure_;
    std::uint64_t seed_;
    double theta_ = 0.0;
    double sqrt_one_minus_rho2_ = 0.0;
    std::vector<bool> is_report_node_;
    std::vector<double> sqrt_dt_;
};

std::vector<PathBundle> sample_paths(const ModelParams&, const ReportSchedule&,
                                     const std::vector<double>& grid, std::size_t n_paths,
                                     Measure, std::uint64_t seed);

}  // namespace tmerton
