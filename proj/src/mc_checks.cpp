#include "tmerton/mc_checks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <utility>

#include "tmerton/accumulate.hpp"
#include "tmerton/rng.hpp"

namespace tmerton {

namespace {

constexpr std::uint64_t kDomainPrice = 0x70726963;       // per-use seed domains
constexpr std::uint64_t kDomainState = 0x73746174;
constexpr std::uint64_t kDomainMartingale = 0x6d617274;
constexpr std::uint64_t kDomainFilter = 0x66696c74;
constexpr std::uint64_t kDomainReplication = 0x7265706c;

std::string fmt_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", t);
    return buf;
}

// Fan paths out over batches; batch b accumulates independently and results
// merge in batch order, so the totals do not depend on the thread count.
template <class Acc, class PerPath>
Acc run_paths(std::size_t n_paths, const McConfig& cfg, const Acc& proto,
              const PerPath& per_path) {
    const std::size_t batch = std::max<std::size_t>(1, cfg.batch);
    const std::size_t n_batches = (n_paths + batch - 1) / batch;
    unsigned threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    if (threads == 0) threads = 1;
    threads = static_cast<unsigned>(
        std::min<std::size_t>(threads, n_batches));

    std::vector<Acc> parts(n_batches, proto);
    if (threads <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t lo = b * batch;
            const std::size_t hi = std::min(n_paths, lo + batch);
            for (std::size_t i = lo; i < hi; ++i) per_path(i, parts[b]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mtx;
        auto work = [&]() {
            try {
                for (;;) {
                    const std::size_t b = next.fetch_add(1);
                    if (b >= n_batches) return;
                    const std::size_t lo = b * batch;
                    const std::size_t hi = std::min(n_paths, lo + batch);
                    for (std::size_t i = lo; i < hi; ++i) per_path(i, parts[b]);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mtx);
                if (!failure) failure = std::current_exception();
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    Acc total = proto;
    for (const Acc& p : parts) total.merge(p);
    return total;
}

McEstimate to_estimate(const Moment& m, std::uint64_t seed) {
    return {m.mean(), m.std_error(), m.n, seed};
}

DualEstimate finish_dual(const Moment& p, const Moment& q, const Moment& diff,
                         std::uint64_t seed) {
    DualEstimate out;
    out.z_weighted_p = to_estimate(p, seed);
    out.discounted_q = to_estimate(q, seed);
    out.difference = diff.mean();
    out.difference_std_error = diff.std_error();
    if (out.difference_std_error > 0.0) {
        out.difference_z = out.difference / out.difference_std_error;
        out.consistent = std::abs(out.difference_z) <= 3.0;
    } else {
        out.difference_z = (out.difference == 0.0)
                               ? 0.0
                               : std::numeric_limits<double>::infinity();
        out.consistent = (out.difference == 0.0);
    }
    return out;
}

CheckLine make_line(std::string label, double estimate, double std_error) {
    CheckLine line;
    line.label = std::move(label);
    line.estimate = estimate;
    line.std_error = std_error;
    if (std_error > 0.0) {
        line.z = estimate / std_error;
        line.pass = std::abs(line.z) <= 3.0;
    } else {
        line.z = (estimate == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        line.pass = (estimate == 0.0);
    }
    return line;
}

CheckLine info_line(std::string label, double estimate, double std_error) {
    CheckLine line;
    line.label = std::move(label);
    line.estimate = estimate;
    line.std_error = std_error;
    line.z = 0.0;
    line.pass = true;
    return line;
}

// Filtered-value column rebuilt from given firm-value and observable-noise
// columns, optionally with a deliberately wrong rho in the filter.
void derive_filtered_column(const ModelParams& p, double filter_rho,
                            const std::vector<double>& grid,
                            const std::vector<bool>& report_node,
                            const std::vector<double>& v, const std::vector<double>& wp,
                            std::vector<double>& out) {
    out.resize(grid.size());
    out[0] = v[0];
    double anchor_t = grid[0];
    double anchor_v = v[0];
    double anchor_wp = wp[0];
    const double sr = p.sigma * filter_rho;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (report_node[i]) {
            out[i] = v[i];
            anchor_t = grid[i];
            anchor_v = v[i];
            anchor_wp = wp[i];
        } else {
            out[i] = anchor_v * std::exp((p.mu - 0.5 * sr * sr) * (grid[i] - anchor_t) +
                                         sr * (wp[i] - anchor_wp));
        }
    }
}

std::vector<std::size_t> anchor_nodes(const std::vector<bool>& report_node) {
    std::vector<std::size_t> anchor(report_node.size(), 0);
    std::size_t last = 0;
    for (std::size_t i = 0; i < report_node.size(); ++i) {
        if (report_node[i]) last = i;
        anchor[i] = last;
    }
    return anchor;
}

}  // namespace

void McConfig::validate() const {
    if (n_paths < 1000)
        throw ValidationError("mc config: at least 1000 paths required");
    if (batch == 0)
        throw ValidationError("mc config: batch size must be positive");
}

double CheckReport::max_abs_z() const {
    double m = 0.0;
    for (const CheckLine& line : lines) m = std::max(m, std::abs(line.z));
    return m;
}

std::string CheckReport::to_text() const {
    std::string out;
    for (const CheckLine& line : lines) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "check=%s stat=%s estimate=%.12g se=%.6g z=%.4g pass=%d\n",
                      name.c_str(), line.label.c_str(), line.estimate, line.std_error, line.z,
                      line.pass ? 1 : 0);
        out += buf;
    }
    return out;
}

DualEstimate mc_price(const ModelParams& params, const ReportSchedule& schedule,
                      const ReportPayoff& payoff, double t_n, const McConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!payoff) throw ValidationError("mc_price: payoff must be callable");
    if (!(t_n > 0.0) || !schedule.contains(t_n))
        throw ValidationError("mc_price: settlement time must be a positive report date");

    std::vector<double> dates;  // report dates in (0, t_n]
    for (double d : schedule.dates())
        if (d > 0.0 && d <= t_n) dates.push_back(d);

    const std::size_t m = dates.size();
    std::vector<double> dt(m), sdt(m);
    double prev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        dt[j] = dates[j] - prev;
        sdt[j] = std::sqrt(dt[j]);
        prev = dates[j];
    }

    const double theta = params.theta();
    const double drift = params.mu - 0.5 * params.sigma * params.sigma;
    const double s1r = std::sqrt((1.0 - params.rho) * (1.0 + params.rho));
    const double disc = std::exp(-params.r * t_n);
    const std::uint64_t base = mix_seed(cfg.seed, kDomainPrice);

    struct Acc {
        Moment p, q, diff;
        std::vector<double> vp, vq;
        void merge(const Acc& o) {
            p.merge(o.p);
            q.merge(o.q);
            diff.merge(o.diff);
        }
    };
    Acc proto;
    proto.vp.resize(m);
    proto.vq.resize(m);

    const auto per_path = [&](std::size_t i, Acc& acc) {
        NormalSampler gen(mix_seed(base, i));
        double wp_p = 0.0, wp_q = 0.0, w_p = 0.0, w_q = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double dw_tilde = sdt[j] * gen.normal();
            const double dw_pp = sdt[j] * gen.normal();
            const double dwp_p = dw_tilde;
            const double dwp_q = dw_tilde + theta * dt[j];
            wp_p += dwp_p;
            wp_q += dwp_q;
            w_p += params.rho * dwp_p + s1r * dw_pp;
            w_q += params.rho * dwp_q + s1r * dw_pp;
            acc.vp[j] = params.v0 * std::exp(drift * dates[j] + params.sigma * w_p);
            acc.vq[j] = params.v0 * std::exp(drift * dates[j] + params.sigma * w_q);
        }
        const double xp = payoff(std::span<const double>(acc.vp));
        const double xq = payoff(std::span<const double>(acc.vq));
        const double z_tn = std::exp(theta * wp_p - 0.5 * theta * theta * t_n - params.r * t_n);
        const double sample_p = z_tn * xp;
        const double sample_q = disc * xq;
        acc.p.add(sample_p);
        acc.q.add(sample_q);
        acc.diff.add(sample_p - sample_q);
    };

    const Acc total = run_paths(cfg.n_paths, cfg, proto, per_path);
    return finish_dual(total.p, total.q, total.diff, cfg.seed);
}

DualEstimate mc_price_from_state(const PricingContext& ctx,
                                 const std::function<double(double)>& terminal_payoff,
                                 double t_n, const McConfig& cfg) {
    ctx.validate();
    cfg.validate();
    if (!terminal_payoff) throw ValidationError("mc_price_from_state: payoff must be callable");
    if (!ctx.schedule.contains(t_n))
        throw ValidationError("mc_price_from_state: settlement time must be a report date");
    const auto period = ctx.period();
    if (!(period.end <= t_n))
        throw ValidationError(
            "mc_price_from_state: settlement must not precede the end of the current period");

    const ModelParams& p = ctx.params;
    const double theta = p.theta();
    const double h = t_n - ctx.t;               // remaining observable horizon
    const double span = t_n - period.start;     // hidden-noise span since the anchor
    const double sh = std::sqrt(h);
    const double sspan = std::sqrt(span);
    const double drift = p.mu - 0.5 * p.sigma * p.sigma;
    const double s1r = std::sqrt((1.0 - p.rho) * (1.0 + p.rho));
    const double disc = std::exp(-p.r * h);
    const double v_k = ctx.last_report_value;
    const double dwp0 = ctx.wprime_increment;
    const std::uint64_t base = mix_seed(cfg.seed, kDomainState);

    struct Acc {
        Moment p, q, diff;
        void merge(const Acc& o) {
            p.merge(o.p);
            q.merge(o.q);
            diff.merge(o.diff);
        }
    };

    const auto per_path = [&](std::size_t i, Acc& acc) {
        NormalSampler gen(mix_seed(base, i));
        const double dw_tilde = sh * gen.normal();
        const double dw_pp = sspan * gen.normal();
        const double dwp_p = dw_tilde;
        const double dwp_q = dw_tilde + theta * h;
        const double v_p =
            v_k * std::exp(drift * span + p.sigma * (p.rho * (dwp0 + dwp_p) + s1r * dw_pp));
        const double v_q =
            v_k * std::exp(drift * span + p.sigma * (p.rho * (dwp0 + dwp_q) + s1r * dw_pp));
        const double weight = std::exp(theta * dwp_p - 0.5 * theta * theta * h - p.r * h);
        const double sample_p = weight * terminal_payoff(v_p);
        const double sample_q = disc * terminal_payoff(v_q);
        acc.p.add(sample_p);
        acc.q.add(sample_q);
        acc.diff.add(sample_p - sample_q);
    };

    const Acc total = run_paths(cfg.n_paths, cfg, Acc{}, per_path);
    return finish_dual(total.p, total.q, total.diff, cfg.seed);
}

CheckReport check_martingale_filtered_value(const ModelParams& params,
                                            const ReportSchedule& schedule,
                                            const McConfig& cfg, NegativeControl control) {
    cfg.validate();
    PathSampler sampler(params, schedule, cfg.grid, Measure::Q,
                        mix_seed(cfg.seed, kDomainMartingale));
    const std::vector<double>& grid = sampler.grid();
    const std::size_t m = grid.size();

    std::size_t report_count = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (sampler.is_report_node()[i]) ++report_count;
    if (report_count < 2)
        throw ValidationError("martingale check: grid must span at least two report periods");
    if (m < 3)
        throw ValidationError("martingale check: grid too coarse");

    const std::vector<std::size_t> anchors = anchor_nodes(sampler.is_report_node());
    std::vector<double> disc(m);
    for (std::size_t i = 0; i < m; ++i) disc[i] = std::exp(-params.r * grid[i]);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    {
        const std::size_t s1 = std::max<std::size_t>(1, m / 3);
        const std::size_t s2 = std::max(s1 + 1, (2 * m) / 3);
        if (s2 < m - 1) {
            pairs = {{s1, s2}, {s1, m - 1}, {s2, m - 1}};
        } else {
            pairs = {{s1, m - 1}};
        }
    }
    const double theta = params.theta();

    struct Acc {
        std::vector<Moment> unconditional;
        std::vector<Moment> orth;
        PathBundle scratch;
        std::vector<double> v2, wp2, vf2, d;
        void merge(const Acc& o) {
            for (std::size_t i = 0; i < unconditional.size(); ++i)
                unconditional[i].merge(o.unconditional[i]);
            for (std::size_t i = 0; i < orth.size(); ++i) orth[i].merge(o.orth[i]);
        }
    };
    Acc proto;
    proto.unconditional.resize(m - 1);
    proto.orth.resize(pairs.size() * 3);
    proto.d.resize(m);

    const auto per_path = [&](std::size_t idx, Acc& acc) {
        sampler.sample_into(idx, acc.scratch);
        const std::vector<double>* v = &acc.scratch.v;
        const std::vector<double>* wp = &acc.scratch.w_prime;
        const std::vector<double>* vf = &acc.scratch.v_filtered;

        switch (control) {
            case NegativeControl::none:
                break;
            case NegativeControl::flipped_theta: {
                // As if the drift adjustment had been applied with the wrong sign.
                acc.wp2.resize(m);
                acc.v2.resize(m);
                for (std::size_t i = 0; i < m; ++i) {
                    acc.wp2[i] = acc.scratch.w_prime[i] - 2.0 * theta * grid[i];
                    const double w_bad =
                        acc.scratch.w[i] - 2.0 * params.rho * theta * grid[i];
                    acc.v2[i] = firm_value(params, grid[i], w_bad);
                }
                derive_filtered_column(params, params.rho, grid, sampler.is_report_node(),
                                       acc.v2, acc.wp2, acc.vf2);
                v = &acc.v2;
                wp = &acc.wp2;
                vf = &acc.vf2;
                break;
            }
            case NegativeControl::wrong_filter_rho: {
                derive_filtered_column(params, 0.7 * params.rho, grid,
                                       sampler.is_report_node(), acc.scratch.v,
                                       acc.scratch.w_prime, acc.vf2);
                vf = &acc.vf2;
                break;
            }
            case NegativeControl::wrong_drift: {
                ModelParams bad = params;
                bad.mu += 0.05;
                acc.v2.resize(m);
                for (std::size_t i = 0; i < m; ++i)
                    acc.v2[i] = firm_value(bad, grid[i], acc.scratch.w[i]);
                derive_filtered_column(params, params.rho, grid, sampler.is_report_node(),
                                       acc.v2, acc.scratch.w_prime, acc.vf2);
                v = &acc.v2;
                vf = &acc.vf2;
                break;
            }
        }

        for (std::size_t i = 0; i < m; ++i) acc.d[i] = (*vf)[i] * disc[i];
        for (std::size_t i = 1; i < m; ++i)
            acc.unconditional[i - 1].add(acc.d[i] - params.v0);
        for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
            const auto [s, t] = pairs[pi];
            const double incr = acc.d[t] - acc.d[s];
            acc.orth[pi * 3 + 0].add(incr);
            acc.orth[pi * 3 + 1].add(incr * (*wp)[s]);
            acc.orth[pi * 3 + 2].add(incr * (*v)[anchors[s]] / params.v0);
        }
    };

    const Acc total = run_paths(cfg.n_paths, cfg, proto, per_path);

    CheckReport report;
    report.name = "martingale_filtered_value";
    for (std::size_t i = 1; i < m; ++i) {
        const Moment& mo = total.unconditional[i - 1];
        report.lines.push_back(
            make_line("mean[Vf*disc-v0]@t=" + fmt_time(grid[i]), mo.mean(), mo.std_error()));
    }
    static const char* instr[3] = {"const", "wprime", "vreport"};
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        for (int g = 0; g < 3; ++g) {
            const Moment& mo = total.orth[pi * 3 + g];
            report.lines.push_back(make_line("orth[" + std::string(instr[g]) +
                                                 "]s=" + fmt_time(grid[pairs[pi].first]) +
                                                 ",t=" + fmt_time(grid[pairs[pi].second]),
                                             mo.mean(), mo.std_error()));
        }
    }
    report.passed = std::all_of(report.lines.begin(), report.lines.end(),
                                [](const CheckLine& l) { return l.pass; });
    return report;
}

CheckReport check_filtering_identity(const ModelParams& params, const ReportSchedule& schedule,
                                     const McConfig& cfg) {
    cfg.validate();
    PathSampler sampler(params, schedule, cfg.grid, Measure::P,
                        mix_seed(cfg.seed, kDomainFilter));
    const std::vector<double>& grid = sampler.grid();
    const std::size_t m = grid.size();
    if (m < 2) throw ValidationError("filtering check: grid too coarse");
    const std::vector<std::size_t> anchors = anchor_nodes(sampler.is_report_node());
    const bool exact_mode = (params.rho == 1.0);

    constexpr std::size_t kBins1d = 12;
    constexpr std::size_t kBins2d = 6;  // per axis

    // Per-node layout: report nodes (and the rho = 1 limit) are exact
    // pathwise identities; interior nodes get conditional bins.
    std::vector<std::size_t> bin_offset(m, 0), bin_count(m, 0);
    std::size_t total_bins = 0;
    for (std::size_t i = 1; i < m; ++i) {
        if (exact_mode || sampler.is_report_node()[i]) continue;
        bin_offset[i] = total_bins;
        bin_count[i] = (anchors[i] == 0) ? kBins1d : kBins2d * kBins2d;
        total_bins += bin_count[i];
    }

    struct Acc {
        std::vector<Moment> bins;
        std::vector<double> exact_max;  // per node, max |V - Vf| (relative)
        PathBundle scratch;
        void merge(const Acc& o) {
            for (std::size_t i = 0; i < bins.size(); ++i) bins[i].merge(o.bins[i]);
            for (std::size_t i = 0; i < exact_max.size(); ++i)
                exact_max[i] = std::max(exact_max[i], o.exact_max[i]);
        }
    };
    Acc proto;
    proto.bins.resize(total_bins);
    proto.exact_max.assign(m, 0.0);

    const auto per_path = [&](std::size_t idx, Acc& acc) {
        sampler.sample_into(idx, acc.scratch);
        const PathBundle& b = acc.scratch;
        for (std::size_t i = 1; i < m; ++i) {
            const double d = b.v[i] - b.v_filtered[i];
            if (exact_mode || sampler.is_report_node()[i]) {
                acc.exact_max[i] = std::max(acc.exact_max[i], std::abs(d) / b.v[i]);
                continue;
            }
            const std::size_t a = anchors[i];
            const double u2 = normal_cdf((b.w_prime[i] - b.w_prime[a]) /
                                         std::sqrt(grid[i] - grid[a]));
            std::size_t bin;
            if (a == 0) {
                bin = std::min<std::size_t>(kBins1d - 1,
                                            static_cast<std::size_t>(u2 * kBins1d));
            } else {
                const double u1 = normal_cdf(b.w[a] / std::sqrt(grid[a]));
                const std::size_t k1 = std::min<std::size_t>(
                    kBins2d - 1, static_cast<std::size_t>(u1 * kBins2d));
                const std::size_t k2 = std::min<std::size_t>(
                    kBins2d - 1, static_cast<std::size_t>(u2 * kBins2d));
                bin = k1 * kBins2d + k2;
            }
            acc.bins[bin_offset[i] + bin].add(d);
        }
    };

    const Acc total = run_paths(cfg.n_paths, cfg, proto, per_path);

    CheckReport report;
    report.name = "filtering_identity";
    for (std::size_t i = 1; i < m; ++i) {
        if (exact_mode || sampler.is_report_node()[i]) {
            CheckLine line;
            line.label = "exact[relmax]@t=" + fmt_time(grid[i]);
            line.estimate = total.exact_max[i];
            line.std_error = 0.0;
            line.z = 0.0;
            line.pass = total.exact_max[i] <=
                        (sampler.is_report_node()[i] && !exact_mode ? 0.0 : 1e-12);
            report.lines.push_back(line);
            continue;
        }
        for (std::size_t bin = 0; bin < bin_count[i]; ++bin) {
            const Moment& mo = total.bins[bin_offset[i] + bin];
            if (mo.n < 30)
                throw ValidationError("filtering check: fewer than 30 paths in a bin; "
                                      "increase n_paths");
            report.lines.push_back(make_line("bin" + std::to_string(bin) +
                                                 "@t=" + fmt_time(grid[i]),
                                             mo.mean(), mo.std_error()));
        }
    }
    report.passed = std::all_of(report.lines.begin(), report.lines.end(),
                                [](const CheckLine& l) { return l.pass; });
    return report;
}

CheckReport check_replication_cost(const ModelParams& params, const ReportSchedule& schedule,
                                   ReplicationPayoffKind kind, const DebtClaim& claim,
                                   const McConfig& cfg) {
    cfg.validate();
    params.validate();
    validate_claim(claim, schedule);

    std::vector<double> grid;
    for (double d : schedule.dates())
        if (d <= claim.maturity) grid.push_back(d);
    const std::size_t idx_m = grid.size() - 1;
    const std::size_t idx_prev = idx_m - 1;
    const double delta_t = grid[idx_m] - grid[idx_prev];
    const double sbar = params.sigma * std::sqrt((1.0 - params.rho) * (1.0 + params.rho)) *
                        std::sqrt(delta_t);
    const double disc = std::exp(-params.r * claim.maturity);

    PathSampler sampler(params, schedule, grid, Measure::Q,
                        mix_seed(cfg.seed, kDomainReplication));

    struct Acc {
        Moment direct, projected, diff;
        PathBundle scratch;
        void merge(const Acc& o) {
            direct.merge(o.direct);
            projected.merge(o.projected);
            diff.merge(o.diff);
        }
    };

    const auto per_path = [&](std::size_t idx, Acc& acc) {
        sampler.sample_into(idx, acc.scratch);
        const PathBundle& b = acc.scratch;
        const double v_prev = b.v[idx_prev];
        const double dwp = b.w_prime[idx_m] - b.w_prime[idx_prev];
        const double v_left = filtered_step(params, delta_t, v_prev, dwp);
        const double v_term = b.v[idx_m];

        double x = 0.0, k = 0.0;
        switch (kind) {
            case ReplicationPayoffKind::market_measurable:
                x = std::min(claim.face, v_left);
                k = x;
                break;
            case ReplicationPayoffKind::terminal_value:
                x = v_term;
                k = v_left;
                break;
            case ReplicationPayoffKind::debt_payoff:
                x = std::min(claim.face, v_term);
                if (sbar == 0.0) {
                    k = x;
                } else {
                    const double a =
                        (std::log(claim.face / v_left) + 0.5 * sbar * sbar) / sbar;
                    k = claim.face * normal_cdf(-a) + v_left * normal_cdf(a - sbar);
                }
                break;
        }
        acc.direct.add(disc * x);
        acc.projected.add(disc * k);
        acc.diff.add(disc * (x - k));
    };

    const Acc total = run_paths(cfg.n_paths, cfg, Acc{}, per_path);

    CheckReport report;
    report.name = "replication_cost";
    report.lines.push_back(
        info_line("price[direct]", total.direct.mean(), total.direct.std_error()));
    report.lines.push_back(
        info_line("price[projected]", total.projected.mean(), total.projected.std_error()));
    report.lines.push_back(
        make_line("difference", total.diff.mean(), total.diff.std_error()));
    report.passed = report.lines.back().pass;
    return report;
}

}  // namespace tmerton
