#include <cmath>
#include <random>

#include "adaptcast/ar_model.hpp"
#include "adaptcast/errors.hpp"
#include "doctest.h"

using namespace adaptcast;

namespace {

std::vector<double> ar1_path(double c, double phi, double start, std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<double> v{start};
    while (v.size() < n) v.push_back(c + phi * v.back() + (sigma > 0 ? noise(rng) : 0.0));
    return v;
}

}  // namespace

TEST_SUITE("arima") {

TEST_CASE("constant series forecasts the constant") {
    const std::vector<double> flat(50, 321.0);
    const auto m = fit_ar1(flat);
    CHECK(m.coefficient == 0.0);
    CHECK(m.intercept == 321.0);
    CHECK(forecast(m, 321.0, 1)[0] == 321.0);
}

TEST_CASE("noiseless process is recovered") {
    const auto v = ar1_path(5.0, 0.8, 100.0, 200, 0.0, 0);
    const auto m = fit_ar1(v);
    CHECK(std::fabs(m.intercept - 5.0) < 1e-9);
    CHECK(std::fabs(m.coefficient - 0.8) < 1e-9);
}

TEST_CASE("noisy process is recovered approximately") {
    // Started away from the stationary mean of 25 so the decay carries
    // information about phi; from a stationary start the standard error of
    // phi is about 0.042 whatever the noise level.
    int good = 0;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
        const auto v = ar1_path(5.0, 0.8, 100.0, 200, 0.5, trial + 100);
        if (std::fabs(fit_ar1(v).coefficient - 0.8) < 0.05) ++good;
    }
    CHECK(good >= 18);
}

TEST_CASE("residuals are orthogonal to the regressor") {
    const auto v = ar1_path(3.0, 0.5, 10.0, 120, 1.0, 4);
    const auto m = fit_ar1(v);
    double sum = 0.0, cross = 0.0, scale = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double r = v[i] - m.intercept - m.coefficient * v[i - 1];
        sum += r;
        cross += r * v[i - 1];
        scale += std::fabs(v[i] * v[i - 1]);
    }
    CHECK(std::fabs(sum) < 1e-9 * scale);
    CHECK(std::fabs(cross) < 1e-9 * scale);
}

TEST_CASE("forecast hand cases") {
    CHECK(forecast(ArModel{4.0, 0.0}, 99.0, 3) == std::vector<double>{4.0, 4.0, 4.0});
    CHECK(forecast(ArModel{0.0, 1.0}, 7.0, 3) == std::vector<double>{7.0, 7.0, 7.0});
    const auto f = forecast(ArModel{5.0, 0.8}, 10.0, 2);
    CHECK(f[0] == doctest::Approx(13.0).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(15.4).epsilon(1e-15));
}

TEST_CASE("long horizon converges to the stationary mean") {
    const auto f = forecast(ArModel{5.0, 0.8}, 10.0, 500);
    CHECK(f.back() == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("bad input") {
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(fit_ar1(two), InsufficientDataError);
    const std::vector<double> nan{1.0, 2.0, std::nan(""), 4.0};
    CHECK_THROWS_AS(fit_ar1(nan), NumericError);
}

}  // TEST_SUITE
