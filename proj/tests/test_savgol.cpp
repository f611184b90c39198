#include <doctest.h>

#include <random>

#include "fgradar/calibration.hpp"
#include "fgradar/errors.hpp"
#include "oracles.hpp"

using namespace fgradar;

TEST_CASE("sg_smooth matches a per-point least-squares fit") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    std::vector<double> x(60);
    for (auto& v : x) v = g(rng);
    for (auto [w, p] : {std::pair{5, 2}, {11, 3}, {21, 4}, {7, 0}}) {
        const auto got = sg_smooth(x, w, p);
        const auto want = oracle::sg_smooth(x, w, p);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
}

TEST_CASE("classic 5-point quadratic weights") {
    // (-3, 12, 17, 12, -3) / 35 at interior points.
    std::vector<double> impulse(11, 0.0);
    impulse[5] = 1.0;
    const auto y = sg_smooth(impulse, 5, 2);
    CHECK(y[3] == doctest::Approx(-3.0 / 35));
    CHECK(y[4] == doctest::Approx(12.0 / 35));
    CHECK(y[5] == doctest::Approx(17.0 / 35));
    CHECK(y[7] == doctest::Approx(-3.0 / 35));
}

TEST_CASE("sg_filter") {
    SUBCASE("constant input") {
        const std::vector<cdouble> c(200, cdouble{0.7, -0.2});
        for (cdouble v : sg_filter(c, 11, 101, 3)) CHECK(std::abs(v) < 1e-12);
    }
    SUBCASE("polynomials up to the order are reproduced") {
        std::vector<cdouble> p(11);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double t = static_cast<double>(i) - 3.0;
            p[i] = {0.5 - 0.2 * t + 0.03 * t * t * t, 1.0 + t * t};
        }
        for (cdouble v : sg_filter(p, 11, 11, 3)) CHECK(std::abs(v) < 1e-9);
        const auto sm = sg_smooth(std::vector<double>{1, 4, 9, 16, 25, 36, 49}, 5, 2);
        for (std::size_t i = 0; i < sm.size(); ++i) CHECK(sm[i] == doctest::Approx(double((i + 1) * (i + 1))));
    }
    SUBCASE("tone gain matches the coefficient response") {
        const std::size_t n = 512, period = 44;
        const double w = 2 * std::numbers::pi / double(period);
        std::vector<cdouble> tone(n);
        for (std::size_t i = 0; i < n; ++i) tone[i] = std::exp(cdouble{0, w * double(i)});
        const auto out = sg_filter(tone, 11, 101, 3);
        // interior response from the oracle's impulse response
        std::vector<double> delta(301, 0.0);
        delta[150] = 1.0;
        const auto hs = oracle::sg_smooth(delta, 11, 3), hl = oracle::sg_smooth(delta, 101, 3);
        cdouble gain{};
        for (std::size_t k = 0; k < delta.size(); ++k)
            gain += (hs[k] - hl[k]) * std::exp(cdouble{0, w * (double(k) - 150.0)});
        for (std::size_t i = 100; i < n - 100; ++i) CHECK(std::abs(out[i] - gain * tone[i]) < 1e-9);
        CHECK(std::abs(gain) > 0.8);
    }
    SUBCASE("preconditions") {
        const std::vector<cdouble> x(50);
        CHECK_THROWS_AS(sg_filter(x, 10, 21, 3), ConfigError);
        CHECK_THROWS_AS(sg_filter(x, 11, 9, 3), ConfigError);
        CHECK_THROWS_AS(sg_filter(x, 11, 51, 3), ConfigError);
        CHECK_THROWS_AS(sg_filter(x, 5, 21, 5), ConfigError);
    }
}

TEST_CASE("SgParams clamping") {
    const SgParams p = SgParams{}.clamped_to(64);
    CHECK(p.long_window == 63);
    CHECK(p.short_window == 11);
    const SgParams q = SgParams{}.clamped_to(8);
    CHECK(q.long_window % 2 == 1);
    CHECK(q.long_window <= 8);
    CHECK(q.short_window <= q.long_window);
    CHECK(q.order < q.short_window);
}
