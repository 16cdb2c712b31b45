// Command-line front end: price | simulate | calibrate | decompose.
//
// All numeric file output is written with 17 significant digits so results
// round-trip exactly and fixed-seed runs reproduce byte for byte.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tmerton/accumulate.hpp"
#include "tmerton/calibration.hpp"
#include "tmerton/config.hpp"
#include "tmerton/csv_io.hpp"
#include "tmerton/paths.hpp"
#include "tmerton/pricing.hpp"

using namespace tmerton;

namespace {

std::vector<double> parse_rho_list(const std::string& text) {
    std::vector<double> out;
    std::string current;
    const auto flush = [&]() {
        if (current.empty()) throw ValidationError("--rho-sweep: empty list entry");
        out.push_back(parse_double_strict(current, "--rho-sweep"));
        current.clear();
    };
    for (char ch : text) {
        if (ch == ',')
            flush();
        else if (!std::isspace(static_cast<unsigned char>(ch)))
            current += ch;
    }
    flush();
    return out;
}

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    return out;
}

// Uniform nodes merged with the report dates; near-duplicates collapse onto
// the report date so the filtered path can re-anchor exactly.
std::vector<double> build_grid(const ReportSchedule& schedule, double horizon, double step) {
    if (!(horizon > 0.0)) throw ValidationError("config key 'horizon_years': must be positive");
    if (!(step > 0.0)) throw ValidationError("config key 'grid_step_years': must be positive");
    std::vector<double> grid;
    for (double d : schedule.dates())
        if (d <= horizon) grid.push_back(d);
    if (grid.empty() || grid.front() != 0.0)
        throw ValidationError("grid construction: schedule must start at 0");
    for (double t = step; t < horizon - 1e-12; t += step) grid.push_back(t);
    if (std::none_of(grid.begin(), grid.end(),
                     [&](double g) { return std::abs(g - horizon) < 1e-9; }))
        grid.push_back(horizon);
    std::sort(grid.begin(), grid.end());
    std::vector<double> out;
    for (double g : grid) {
        if (!out.empty() && g - out.back() < 1e-9) {
            if (schedule.contains(g)) out.back() = g;  // prefer the exact report date
            continue;
        }
        out.push_back(g);
    }
    return out;
}

std::vector<double> default_observation_times(const ReportSchedule& schedule,
                                              double maturity) {
    std::vector<double> times;
    const auto& dates = schedule.dates();
    for (std::size_t i = 0; i + 1 < dates.size() && dates[i] < maturity; ++i) {
        const double end = std::min(dates[i + 1], maturity);
        times.push_back(0.5 * (dates[i] + end));
        if (dates[i + 1] < maturity) times.push_back(dates[i + 1]);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

std::string fmt_or_nan(double x) { return std::isfinite(x) ? fmt17(x) : "nan"; }

int cmd_price(const ConfigMap& cfg, const std::string& rho_sweep,
              const std::string& out_dir) {
    const ModelParams params = model_params_from(cfg);
    const ReportSchedule schedule = schedule_from(cfg);
    const DebtClaim claim = claim_from(cfg);
    validate_claim(claim, schedule);
    const std::vector<double> times = cfg.get_double_list("price_times_years");
    const double market_value = cfg.find_double("market_value").value_or(params.v0);
    if (!(market_value > 0.0))
        throw ValidationError("config key 'market_value': must be positive");

    std::vector<double> rhos = {params.rho};
    if (!rho_sweep.empty()) rhos = parse_rho_list(rho_sweep);

    struct Row {
        double t, rho, debt, equity, spread;
    };
    std::vector<Row> rows;
    for (double t : times) {
        if (!(t >= 0.0) || !(t < claim.maturity))
            throw ValidationError("config key 'price_times_years': time " + fmt17(t) +
                                  " outside [0, maturity)");
        const double t_k = schedule.period_containing(t).start;
        for (double rho : rhos) {
            ModelParams p = params;
            p.rho = rho;
            p.validate();
            const double debt = debt_price(p, t, t_k, market_value, claim);
            const double equity = equity_price(p, t, t_k, market_value, claim);
            const double spread =
                (claim.face > 0.0 && debt > 0.0)
                    ? credit_spread_from_price(debt, claim, t, p.r)
                    : std::numeric_limits<double>::quiet_NaN();
            rows.push_back({t, rho, debt, equity, spread});
        }
    }

    std::printf("%10s %8s %16s %16s %14s\n", "t", "rho", "debt", "equity", "spread");
    for (const Row& row : rows)
        std::printf("%10.6f %8.4f %16.8f %16.8f %14.8f\n", row.t, row.rho, row.debt,
                    row.equity, row.spread);

    if (!out_dir.empty()) {
        auto out = open_output(ensure_out_dir(out_dir) / "prices.csv");
        out << "t,rho,debt,equity,spread\n";
        for (const Row& row : rows)
            out << fmt17(row.t) << ',' << fmt17(row.rho) << ',' << fmt17(row.debt) << ','
                << fmt17(row.equity) << ',' << fmt_or_nan(row.spread) << "\n";
    }
    return 0;
}

int cmd_simulate(const ConfigMap& cfg, const std::string& out_dir) {
    const ModelParams params = model_params_from(cfg);
    const ReportSchedule schedule = schedule_from(cfg);
    const DebtClaim claim = claim_from(cfg);
    validate_claim(claim, schedule);

    const std::uint64_t seed = cfg.find_uint("seed").value_or(0);
    const std::size_t n_paths =
        static_cast<std::size_t>(cfg.find_uint("n_paths").value_or(10000));
    if (n_paths == 0) throw ValidationError("config key 'n_paths': must be positive");
    const double horizon = cfg.find_double("horizon_years").value_or(claim.maturity);
    const double step = cfg.find_double("grid_step_years").value_or(horizon / 16.0);
    const double noise = cfg.find_double("noise_rel_sd").value_or(0.0);

    const std::vector<double> grid = build_grid(schedule, horizon, step);
    PathSampler sampler(params, schedule, grid, Measure::P, seed);

    std::vector<Moment> v_m(grid.size()), vf_m(grid.size()), z_m(grid.size());
    PathBundle bundle;
    for (std::size_t i = 0; i < n_paths; ++i) {
        sampler.sample_into(i, bundle);
        for (std::size_t j = 0; j < grid.size(); ++j) {
            v_m[j].add(bundle.v[j]);
            vf_m[j].add(bundle.v_filtered[j]);
            z_m[j].add(bundle.z[j] * std::exp(params.r * grid[j]));
        }
    }

    const auto dir = ensure_out_dir(out_dir);
    {
        auto out = open_output(dir / "paths.csv");
        out << "t,v_mean,v_filtered_mean,z_ert_mean,z_ert_se\n";
        for (std::size_t j = 0; j < grid.size(); ++j)
            out << fmt17(grid[j]) << ',' << fmt17(v_m[j].mean()) << ',' << fmt17(vf_m[j].mean())
                << ',' << fmt17(z_m[j].mean()) << ',' << fmt17(z_m[j].std_error()) << "\n";
    }

    std::vector<double> obs_times;
    if (const auto custom = cfg.find_double_list("obs_times_years"))
        obs_times = *custom;
    else
        obs_times = default_observation_times(schedule, claim.maturity);
    const SyntheticMarket market =
        generate_synthetic_market(params, schedule, claim, obs_times, noise, seed);
    write_observations_csv((dir / "observations.csv").string(), market.observations);

    std::printf("wrote %s (%zu paths, %zu grid nodes)\n", (dir / "paths.csv").c_str(), n_paths,
                grid.size());
    std::printf("wrote %s (%zu observations)\n", (dir / "observations.csv").c_str(),
                market.observations.size());
    return 0;
}

void write_diag(std::ofstream& out, const std::string& prefix,
                const BracketDiagnostics& diag) {
    out << prefix << "_bracket_lower = " << fmt17(diag.lower) << "\n";
    out << prefix << "_bracket_upper = " << fmt17(diag.upper) << "\n";
    out << prefix << "_iterations = " << diag.iterations << "\n";
    out << prefix << "_residual = " << fmt17(diag.residual) << "\n";
    out << prefix << "_sensitivity = " << fmt17(diag.sensitivity) << "\n";
    out << prefix << "_ill_conditioned = " << (diag.ill_conditioned ? 1 : 0) << "\n";
    if (!diag.note.empty()) out << prefix << "_note = " << diag.note << "\n";
}

int cmd_calibrate(const ConfigMap& cfg, const std::string& obs_path,
                  const std::string& out_dir) {
    const ReportSchedule schedule = schedule_from(cfg);
    const double r = cfg.get_double("r_per_year");
    const double tol = cfg.find_double("price_tol_rel").value_or(1e-10);
    const auto observations = read_observations_csv(obs_path);
    const CalibrationResult result = calibrate(observations, schedule, r, tol);

    std::printf("sigma_hat = %.12g\n", result.sigma_hat);
    if (result.rho_hat)
        std::printf("rho_hat = %.12g\n", *result.rho_hat);
    else
        std::printf("rho_hat = unidentified\n");
    double max_res = 0.0;
    for (double res : result.residuals)
        if (std::isfinite(res)) max_res = std::max(max_res, std::abs(res));
    std::printf("max |residual| = %.3g over %zu observations\n", max_res,
                observations.size());
    if (result.sigma_diagnostics.ill_conditioned)
        std::printf("warning: sigma %s\n", result.sigma_diagnostics.note.c_str());
    if (result.rho_hat && result.rho_diagnostics.ill_conditioned)
        std::printf("warning: rho %s\n", result.rho_diagnostics.note.c_str());

    auto out = open_output(ensure_out_dir(out_dir) / "calibration.txt");
    out << "sigma_hat = " << fmt17(result.sigma_hat) << "\n";
    out << "rho_hat = " << (result.rho_hat ? fmt17(*result.rho_hat) : "unidentified") << "\n";
    out << "n_observations = " << observations.size() << "\n";
    for (std::size_t i = 0; i < result.residuals.size(); ++i)
        out << "residual_" << i << " = " << fmt_or_nan(result.residuals[i]) << "\n";
    write_diag(out, "sigma", result.sigma_diagnostics);
    if (result.rho_hat) write_diag(out, "rho", result.rho_diagnostics);
    return 0;
}

int cmd_decompose(const ConfigMap& cfg, const std::string& obs_path,
                  const std::string& out_dir) {
    const ReportSchedule schedule = schedule_from(cfg);
    const double r = cfg.get_double("r_per_year");
    const double tol = cfg.find_double("price_tol_rel").value_or(1e-10);
    const auto observations = read_observations_csv(obs_path);
    const CalibrationResult result = calibrate(observations, schedule, r, tol);
    if (!result.rho_hat)
        throw NumericalError("decompose: rho is unidentified (no intra-period observation); "
                             "cannot split the spread");

    std::printf("sigma_hat = %.12g, rho_hat = %.12g\n", result.sigma_hat, *result.rho_hat);
    std::printf("%10s %16s %16s %16s\n", "t", "total", "default", "transparency");

    auto out = open_output(ensure_out_dir(out_dir) / "decomposition.csv");
    out << "t,total_spread,default_spread,transparency_spread\n";
    for (const MarketObservation& obs : observations) {
        const auto dec =
            decompose_spread(obs, schedule, result.sigma_hat, *result.rho_hat, r);
        std::printf("%10.6f %16.10f %16.10f %16.10f\n", obs.t, dec.total,
                    dec.default_component, dec.transparency_component);
        out << fmt17(obs.t) << ',' << fmt17(dec.total) << ',' << fmt17(dec.default_component)
            << ',' << fmt17(dec.transparency_component) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural credit model with periodic accounting reports: pricing, "
                 "simulation, calibration, spread decomposition"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string obs_path;
    std::string out_dir = ".";
    std::string rho_sweep;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::uint64_t> paths_flag;

    app.add_option("--config", config_path, "key = value configuration file")->required();
    app.add_option("--out", out_dir, "output directory (default: current directory)");
    app.add_option("--seed", seed_flag, "override the config seed");
    app.add_option("--paths", paths_flag, "override the config path count");

    auto* price = app.add_subcommand("price", "closed-form debt and equity prices and spreads");
    price->add_option("--rho-sweep", rho_sweep, "comma-separated rho values to sweep");
    auto* simulate =
        app.add_subcommand("simulate", "sample paths and write a synthetic market");
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "implied sigma and rho from observations");
    calibrate_cmd->add_option("--obs", obs_path, "observations csv")->required();
    auto* decompose_cmd = app.add_subcommand(
        "decompose", "split observed spreads into default and transparency parts");
    decompose_cmd->add_option("--obs", obs_path, "observations csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        ConfigMap cfg = ConfigMap::load_file(config_path);
        cfg.apply_env_overrides();
        if (seed_flag) cfg.set("seed", std::to_string(*seed_flag));
        if (paths_flag) cfg.set("n_paths", std::to_string(*paths_flag));

        if (price->parsed()) return cmd_price(cfg, rho_sweep, out_dir);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (calibrate_cmd->parsed()) return cmd_calibrate(cfg, obs_path, out_dir);
        if (decompose_cmd->parsed()) return cmd_decompose(cfg, obs_path, out_dir);
        return 1;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
