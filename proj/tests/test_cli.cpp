#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tmerton/csv_io.hpp"
#include "tmerton/pricing.hpp"

using namespace tmerton;

namespace {

namespace fs = std::filesystem;

std::string cli_bin() {
    const char* bin = std::getenv("TMERTON_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "TMERTON_CLI_BIN must point at the cli binary");
    return bin;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tmerton_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const TempDir& dir, const std::string& args) {
    const fs::path out_file = dir.path / "stdout.txt";
    const fs::path err_file = dir.path / "stderr.txt";
    const std::string cmd = cli_bin() + " " + args + " > " + out_file.string() + " 2> " +
                            err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

std::string slurp_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_base_config(const fs::path& path, const std::string& extra = "") {
    std::ofstream out(path);
    out << "v0 = 100.0\n"
        << "mu_per_year = 0.08\n"
        << "sigma_per_sqrt_year = 0.25\n"
        << "r_per_year = 0.03\n"
        << "rho = 0.6\n"
        << "schedule_years = 0.0, 1.0, 2.0\n"
        << "face = 95.0\n"
        << "maturity_year = 2.0\n"
        << "n_paths = 4000\n"
        << "seed = 91\n"
        << "grid_step_years = 0.25\n"
        << "noise_rel_sd = 0.0\n"
        << "price_times_years = 0.0, 0.5, 1.0, 1.5\n"
        << extra;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(split_csv_line(line));
    return rows;
}

}  // namespace

TEST_CASE("price rows cross-check the library byte for byte") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    const auto res = run_cli(dir, "price --config " + cfg.string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);

    const auto rows = read_csv(dir.path / "prices.csv");
    REQUIRE(rows.size() == 5);  // header + 4 times
    CHECK(rows[0] == std::vector<std::string>{"t", "rho", "debt", "equity", "spread"});

    const ModelParams params{100.0, 0.08, 0.25, 0.03, 0.6};
    const ReportSchedule sched({0.0, 1.0, 2.0});
    const DebtClaim claim{95.0, 2.0};
    const std::vector<double> times{0.0, 0.5, 1.0, 1.5};
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t_k = sched.period_containing(times[i]).start;
        const double debt = debt_price(params, times[i], t_k, 100.0, claim);
        const double equity = equity_price(params, times[i], t_k, 100.0, claim);
        const double spread = credit_spread_from_price(debt, claim, times[i], params.r);
        CHECK(rows[i + 1][0] == fmt17(times[i]));
        CHECK(rows[i + 1][2] == fmt17(debt));
        CHECK(rows[i + 1][3] == fmt17(equity));
        CHECK(rows[i + 1][4] == fmt17(spread));
    }
}

TEST_CASE("price with zero face writes a zero debt column") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg, "face = 0.0\n");
    const auto res = run_cli(dir, "price --config " + cfg.string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);
    const auto rows = read_csv(dir.path / "prices.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][2] == "0");
        CHECK(rows[i][4] == "nan");
    }
}

TEST_CASE("rho sweep repeats report-date rows identically") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    const auto res = run_cli(dir, "price --config " + cfg.string() + " --out " +
                                      dir.path.string() + " --rho-sweep 0.3,0.7,1.0");
    CHECK(res.exit_code == 0);
    const auto rows = read_csv(dir.path / "prices.csv");
    REQUIRE(rows.size() == 13);  // header + 4 times x 3 rhos
    for (std::size_t i = 1; i < rows.size(); i += 3) {
        const bool report_date = rows[i][0] == "0" || rows[i][0] == "1";
        if (!report_date) continue;
        // debt, equity and spread identical across the sweep
        for (int col : {2, 3, 4}) {
            CHECK(rows[i][col] == rows[i + 1][col]);
            CHECK(rows[i][col] == rows[i + 2][col]);
        }
    }
}

TEST_CASE("simulate is deterministic for a fixed seed") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    const fs::path out1 = dir.path / "a", out2 = dir.path / "b";
    CHECK(run_cli(dir, "simulate --config " + cfg.string() + " --out " + out1.string())
              .exit_code == 0);
    CHECK(run_cli(dir, "simulate --config " + cfg.string() + " --out " + out2.string())
              .exit_code == 0);
    CHECK(slurp_file(out1 / "paths.csv") == slurp_file(out2 / "paths.csv"));
    CHECK(slurp_file(out1 / "observations.csv") == slurp_file(out2 / "observations.csv"));

    // a different seed changes the draw
    CHECK(run_cli(dir, "simulate --config " + cfg.string() + " --out " + out2.string() +
                           " --seed 77")
              .exit_code == 0);
    CHECK(slurp_file(out1 / "observations.csv") != slurp_file(out2 / "observations.csv"));
}

TEST_CASE("simulate under full transparency keeps both value columns equal") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg, "rho = 1.0\n");
    const auto res = run_cli(dir, "simulate --config " + cfg.string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);
    const auto rows = read_csv(dir.path / "paths.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double v = parse_double_strict(rows[i][1], "v");
        const double vf = parse_double_strict(rows[i][2], "vf");
        CHECK(vf == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("simulated pricing kernel stays a discounted martingale") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg, "n_paths = 20000\n");
    const auto res = run_cli(dir, "simulate --config " + cfg.string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);
    const auto rows = read_csv(dir.path / "paths.csv");
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double mean = parse_double_strict(rows[i][3], "z mean");
        const double se = parse_double_strict(rows[i][4], "z se");
        CHECK(std::abs(mean - 1.0) <= 3.0 * se);
    }
}

TEST_CASE("calibrate recovers the generating parameters end to end") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    REQUIRE(run_cli(dir, "simulate --config " + cfg.string() + " --out " + dir.path.string())
                .exit_code == 0);
    const auto res = run_cli(dir, "calibrate --config " + cfg.string() + " --obs " +
                                      (dir.path / "observations.csv").string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);
    const std::string text = slurp_file(dir.path / "calibration.txt");
    double sigma_hat = 0.0, rho_hat = 0.0;
    for (const std::string& key : {std::string("sigma_hat"), std::string("rho_hat")}) {
        const auto pos = text.find(key + " = ");
        REQUIRE(pos != std::string::npos);
        const double value = std::strtod(text.c_str() + pos + key.size() + 3, nullptr);
        (key == "sigma_hat" ? sigma_hat : rho_hat) = value;
    }
    CHECK(std::abs(sigma_hat - 0.25) <= 1e-6);
    CHECK(std::abs(rho_hat - 0.6) <= 1e-6);
}

TEST_CASE("calibrate with report-date rows only reports rho as unidentified") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg, "obs_times_years = 1.0\n");
    REQUIRE(run_cli(dir, "simulate --config " + cfg.string() + " --out " + dir.path.string())
                .exit_code == 0);
    const auto res = run_cli(dir, "calibrate --config " + cfg.string() + " --obs " +
                                      (dir.path / "observations.csv").string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);
    CHECK(slurp_file(dir.path / "calibration.txt").find("rho_hat = unidentified") !=
          std::string::npos);

    // and decomposition then refuses with a numerical-failure exit
    const auto dec = run_cli(dir, "decompose --config " + cfg.string() + " --obs " +
                                      (dir.path / "observations.csv").string() + " --out " +
                                      dir.path.string());
    CHECK(dec.exit_code == 2);
    CHECK(dec.err.find("unidentified") != std::string::npos);
}

TEST_CASE("decompose columns add up exactly and vanish at report dates") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    REQUIRE(run_cli(dir, "simulate --config " + cfg.string() + " --out " + dir.path.string())
                .exit_code == 0);
    const auto res = run_cli(dir, "decompose --config " + cfg.string() + " --obs " +
                                      (dir.path / "observations.csv").string() + " --out " +
                                      dir.path.string());
    CHECK(res.exit_code == 0);
    const auto obs = read_observations_csv((dir.path / "observations.csv").string());
    const auto rows = read_csv(dir.path / "decomposition.csv");
    REQUIRE(rows.size() == obs.size() + 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double total = parse_double_strict(rows[i][1], "total");
        const double def = parse_double_strict(rows[i][2], "default");
        const double trans = parse_double_strict(rows[i][3], "transparency");
        CHECK(def + trans == total);
        if (obs[i - 1].at_report_date) CHECK(trans == 0.0);
    }
}

TEST_CASE("validation failures exit with code 1") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    SUBCASE("missing config key names the field") {
        std::ofstream(cfg, std::ios::trunc) << "v0 = 100\n";
        const auto res = run_cli(dir, "price --config " + cfg.string());
        CHECK(res.exit_code == 1);
        CHECK(res.err.find("mu_per_year") != std::string::npos);
    }
    SUBCASE("missing config file") {
        const auto res = run_cli(dir, "price --config " + (dir.path / "nope.cfg").string());
        CHECK(res.exit_code == 1);
    }
    SUBCASE("corrupted observation row carries its line number") {
        const fs::path obs = dir.path / "bad.csv";
        std::ofstream(obs) << "t,price,v_prime,at_report_date,face,maturity\n"
                           << "1.0,85,101,1,95,2\n"
                           << "1.5,??,99,0,95,2\n";
        const auto res = run_cli(dir, "calibrate --config " + cfg.string() + " --obs " +
                                          obs.string());
        CHECK(res.exit_code == 1);
        CHECK(res.err.find(":3") != std::string::npos);
    }
}

TEST_CASE("unattainable prices exit with code 2") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.cfg";
    write_base_config(cfg);
    const fs::path obs = dir.path / "obs.csv";
    // price above the zero-volatility bound but below the no-arbitrage bound
    std::ofstream(obs) << "t,price,v_prime,at_report_date,face,maturity\n"
                       << "1.0,93,60,1,95,2\n";
    const auto res = run_cli(dir, "calibrate --config " + cfg.string() + " --obs " +
                                      obs.string());
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("bound") != std::string::npos);
}
