#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tmerton/model.hpp"
#include "tmerton/normal.hpp"

using namespace tmerton;

namespace {
const ModelParams kBase{100.0, 0.08, 0.2, 0.03, 0.5};
}

TEST_CASE("params validation") {
    ModelParams p = kBase;
    CHECK_NOTHROW(p.validate());
    p.v0 = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = kBase;
    p.rho = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.rho = 1.0;
    CHECK_NOTHROW(p.validate());
    p.rho = 1.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = kBase;
    p.sigma = -0.1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("theta derived value and degenerate error") {
    // independent arithmetic: theta = -(0.08 - 0.03) / (0.2 * 0.5) = -0.5
    CHECK(kBase.theta() == doctest::Approx(-0.5).epsilon(1e-15));
    ModelParams p = kBase;
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.theta(), NumericalError);
}

TEST_CASE("report schedule lookup") {
    ReportSchedule sched({0.0, 0.5, 1.25, 2.0});
    CHECK(sched.contains(0.5));
    CHECK_FALSE(sched.contains(0.6));

    auto period = sched.period_containing(0.7);
    CHECK(period.start == 0.5);
    CHECK(period.end == 1.25);
    CHECK(period.index == 1);

    // a report date belongs to the period it opens
    period = sched.period_containing(0.5);
    CHECK(period.start == 0.5);
    CHECK(period.end == 1.25);

    CHECK_THROWS_AS(sched.period_containing(-0.1), ValidationError);
    CHECK_THROWS_AS(sched.period_containing(2.0), ValidationError);
    CHECK_THROWS_AS(sched.period_containing(5.0), ValidationError);

    CHECK_THROWS_AS(ReportSchedule({0.5, 1.0}), ValidationError);   // must start at 0
    CHECK_THROWS_AS(ReportSchedule({0.0, 1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(ReportSchedule({}), ValidationError);
}

TEST_CASE("claim validation") {
    ReportSchedule sched({0.0, 1.0, 2.0});
    CHECK_NOTHROW(validate_claim({70.0, 2.0}, sched));
    CHECK_THROWS_AS(validate_claim({70.0, 1.5}, sched), ValidationError);
    CHECK_THROWS_AS(validate_claim({-1.0, 1.0}, sched), ValidationError);
    CHECK_THROWS_AS(validate_claim({70.0, 0.0}, sched), ValidationError);
}

TEST_CASE("firm value") {
    SUBCASE("initial condition") {
        CHECK(firm_value(kBase, 0.0, 0.0) == 100.0);
    }
    SUBCASE("deterministic sigma = 0") {
        ModelParams p = kBase;
        p.sigma = 0.0;
        p.mu = 0.05;
        CHECK(firm_value(p, 2.0, 123.0) == doctest::Approx(100.0 * std::exp(0.1)).epsilon(1e-15));
    }
    SUBCASE("generic value against direct evaluation of the exponent") {
        ModelParams p = kBase;
        p.mu = 0.05;
        // exponent assembled term by term as an independent arithmetic check
        const double exponent = 0.05 * 1.0 - 0.5 * 0.2 * 0.2 * 1.0 + 0.2 * 0.5;
        CHECK(exponent == doctest::Approx(0.13).epsilon(1e-15));
        CHECK(firm_value(p, 1.0, 0.5) ==
              doctest::Approx(100.0 * std::exp(exponent)).epsilon(1e-15));
    }
    SUBCASE("positivity over random inputs") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            ModelParams p = kBase;
            p.mu = 0.3 * u(rng);
            p.sigma = 0.6 * std::abs(u(rng));
            const double t = 5.0 * std::abs(u(rng));
            const double w = 4.0 * u(rng);
            CHECK(firm_value(p, t, w) > 0.0);
        }
    }
    CHECK_THROWS_AS(firm_value(kBase, -1.0, 0.0), ValidationError);
}

TEST_CASE("filtered value") {
    ReportSchedule sched({0.0, 1.0, 2.0});
    SUBCASE("zero increment at the anchor returns the anchor exactly") {
        CHECK(filtered_value(kBase, sched, 1.0, 104.0, 0.0) == 104.0);
    }
    SUBCASE("deterministic sigma = 0 grows at mu") {
        ModelParams p = kBase;
        p.sigma = 0.0;
        CHECK(filtered_value(p, sched, 1.5, 104.0, 0.7) ==
              doctest::Approx(104.0 * std::exp(p.mu * 0.5)).epsilon(1e-15));
    }
    SUBCASE("rho = 1 coincides with the firm value driven by the same noise") {
        ModelParams p = kBase;
        p.rho = 1.0;
        const double w_tk = 0.3, dw = 0.4;
        const double v_tk = firm_value(p, 1.0, w_tk);
        const double direct = firm_value(p, 1.6, w_tk + dw);
        CHECK(filtered_value(p, sched, 1.6, v_tk, dw) ==
              doctest::Approx(direct).epsilon(1e-14));
    }
    CHECK_THROWS_AS(filtered_value(kBase, sched, -0.5, 100.0, 0.0), ValidationError);
    CHECK_THROWS_AS(filtered_value(kBase, sched, 0.5, 0.0, 0.0), ValidationError);
}

TEST_CASE("state price density") {
    SUBCASE("starts at one") {
        CHECK(state_price_density(kBase, 0.0, 0.0) == 1.0);
    }
    SUBCASE("risk-neutral drift collapses to pure discounting") {
        ModelParams p = kBase;
        p.mu = p.r;
        CHECK(state_price_density(p, 2.0, 0.9) == doctest::Approx(std::exp(-p.r * 2.0)).epsilon(1e-15));
    }
    SUBCASE("generic value against direct evaluation of the exponent") {
        // theta = -0.5; exponent = theta w' - theta^2 t / 2 - r t
        const double exponent = -0.5 * 0.3 - 0.5 * 0.25 * 1.0 - 0.03 * 1.0;
        CHECK(exponent == doctest::Approx(-0.305).epsilon(1e-15));
        CHECK(state_price_density(kBase, 1.0, 0.3) ==
              doctest::Approx(std::exp(exponent)).epsilon(1e-15));
    }
    SUBCASE("degenerate sigma rho") {
        ModelParams p = kBase;
        p.sigma = 0.0;
        CHECK_THROWS_AS(state_price_density(p, 1.0, 0.0), NumericalError);
    }
}

TEST_CASE("normal cdf basics") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(-8.0) < 1e-14);
    CHECK(normal_cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-6));
    // monotone and symmetric on a grid
    double prev = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        const double c = normal_cdf(x);
        CHECK(c >= prev);
        CHECK(normal_cdf(-x) == doctest::Approx(1.0 - c).epsilon(1e-13));
        prev = c;
    }
}

namespace {
// Independent oracle: adaptive Simpson integration of the density on [0, x].
double simpson(double a, double b, int n) {
    double h = (b - a) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x0 = a + i * h, x2 = x0 + h, x1 = 0.5 * (x0 + x2);
        const auto phi = [](double x) {
            return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0));
        };
        acc += (h / 6.0) * (phi(x0) + 4.0 * phi(x1) + phi(x2));
    }
    return acc;
}
}  // namespace

TEST_CASE("normal cdf against quadrature oracle") {
    for (double x : {0.1, 0.5, 1.0, 1.959964, 2.5, 3.7}) {
        const double oracle = 0.5 + simpson(0.0, x, 4000);
        CHECK(normal_cdf(x) == doctest::Approx(oracle).epsilon(1e-10));
    }
}

TEST_CASE("normal icdf inverts the cdf") {
    for (double p = 0.002; p < 1.0; p += 0.007) {
        CHECK(normal_cdf(normal_icdf(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_icdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
    CHECK_THROWS_AS(normal_icdf(0.0), ValidationError);
    CHECK_THROWS_AS(normal_icdf(1.0), ValidationError);
}
