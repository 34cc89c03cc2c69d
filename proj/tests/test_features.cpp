#include <algorithm>
#include <cmath>
#include <random>

#include "adaptcast/errors.hpp"
#include "adaptcast/features.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace adaptcast;

namespace {

TimeSeries stream_with(const std::vector<double>& cases, const std::vector<double>& other) {
    TimeSeries ts;
    for (std::size_t i = 0; i < cases.size(); ++i) ts.dates.push_back(make_date(2021, 1, 1) + std::chrono::days(i));
    ts.values = cases;
    ts.covariates["other"] = other;
    return ts;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("aggregator hand cases") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(aggregate(a, Aggregator::Mean) == 2.5);
    const std::vector<double> c{7, 7, 7, 7};
    CHECK(aggregate(c, Aggregator::StdDev) == 0.0);
    CHECK(aggregate(c, Aggregator::Range) == 0.0);
    const std::vector<double> b{3, 1, 4, 1, 5};
    CHECK(aggregate(b, Aggregator::Median) == 3.0);
    CHECK(aggregate(b, Aggregator::Range) == 4.0);
    CHECK(aggregate(b, Aggregator::Min) == 1.0);
    CHECK(aggregate(b, Aggregator::Max) == 5.0);
    CHECK(aggregate(a, Aggregator::Median) == 2.5);
}

TEST_CASE("aggregators agree with brute force on random windows") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> len(2, 40);
    std::uniform_real_distribution<double> val(-1000.0, 5000.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> w(static_cast<std::size_t>(len(rng)));
        for (auto& v : w) v = val(rng);
        worst = std::max(worst, oracle::relative_error(aggregate(w, Aggregator::Median), oracle::sorted_median(w)));
        worst = std::max(worst, oracle::relative_error(aggregate(w, Aggregator::StdDev), oracle::definitional_std(w)));
        worst = std::max(worst, oracle::relative_error(aggregate(w, Aggregator::Mean), oracle::definitional_mean(w)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("aggregators ignore order") {
    std::mt19937_64 rng(5);
    std::vector<double> w{5, 2, 9, 9, 1, 0.5, 12, 3};
    for (auto agg : {Aggregator::Mean, Aggregator::Min, Aggregator::Max, Aggregator::Median, Aggregator::Range,
                     Aggregator::StdDev}) {
        const double ref = aggregate(w, agg);
        for (int k = 0; k < 10; ++k) {
            auto p = w;
            std::shuffle(p.begin(), p.end(), rng);
            CHECK(aggregate(p, agg) == doctest::Approx(ref).epsilon(1e-14));
        }
    }
}

TEST_CASE("window aggregation is causal") {
    std::vector<double> cases(30), other(30);
    for (std::size_t i = 0; i < 30; ++i) {
        cases[i] = 100.0 + static_cast<double>(i);
        other[i] = static_cast<double>(i % 5);
    }
    FeatureSpec spec{{{"cases", Aggregator::Mean}, {"other", Aggregator::Max}, {"cases", Aggregator::StdDev}}, 7};
    const auto ts = stream_with(cases, other);
    const auto before = aggregate_window(ts, 14, spec);
    auto mutated = ts;
    for (std::size_t i = 15; i < 30; ++i) {
        mutated.values[i] = 1e9;
        mutated.covariates["other"][i] = -1e9;
    }
    CHECK(aggregate_window(mutated, 14, spec) == before);

    const std::vector<double> slice(cases.begin() + 8, cases.begin() + 15);
    CHECK(before[0] == doctest::Approx(oracle::definitional_mean(slice)));
}

TEST_CASE("window before stream start is insufficient data") {
    const auto ts = stream_with(std::vector<double>(10, 150.0), std::vector<double>(10, 1.0));
    FeatureSpec spec{{{"cases", Aggregator::Mean}}, 7};
    CHECK_THROWS_AS(aggregate_window(ts, 5, spec), InsufficientDataError);
    CHECK_NOTHROW(aggregate_window(ts, 6, spec));
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(FeatureSpec{}.validate(), ConfigError);
    FeatureSpec one{{{"cases", Aggregator::StdDev}}, 1};
    CHECK_THROWS_AS(one.validate(), ConfigError);
    FeatureSpec missing{{{"nope", Aggregator::Mean}}, 7};
    CHECK_THROWS_AS(missing.validate_against(stream_with({1, 2}, {1, 2})), ConfigError);
    CHECK(parse_feature_item("recovered:std-dev") == FeatureItem{"recovered", Aggregator::StdDev});
    CHECK_THROWS_AS(parse_feature_item("recovered"), ConfigError);
    CHECK_THROWS_AS(parse_feature_item("recovered:mode"), ConfigError);
}

TEST_CASE("default twenty-item feature set") {
    const auto spec = default_paper_spec();
    CHECK(spec.items.size() == 20);
    CHECK(spec.window == 14);
    CHECK(spec.items.front() == FeatureItem{"school_closing", Aggregator::Mean});
    using A = Aggregator;
    const std::vector<std::pair<std::string, A>> expected{
        {"school_closing", A::Mean},       {"public_events_cancellation", A::Mean},
        {"cases", A::Min},                 {"cases", A::Max},
        {"unvaccinated_cases", A::Min},    {"unvaccinated_cases", A::Median},
        {"second_dose_population", A::Min}, {"second_dose_population", A::Range},
        {"second_dose_cases", A::Mean},    {"second_dose_cases", A::Median},
        {"first_dose_cases", A::Median},   {"first_dose_cases", A::Mean},
        {"weekly_deaths", A::Mean},        {"workplace_closing", A::Mean},
        {"weekly_icu", A::Mean},           {"weighted_stringency", A::Median},
        {"recovered", A::StdDev},          {"cases_70_plus", A::Mean},
        {"first_dose_population", A::Median}, {"cases_18_24", A::Mean},
    };
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(spec.items[i].column == expected[i].first);
        CHECK(spec.items[i].aggregator == expected[i].second);
    }
}

}  // TEST_SUITE
