#include <algorithm>
#include <cmath>
#include <sstream>

#include "adaptcast/errors.hpp"
#include "adaptcast/time_series.hpp"
#include "doctest.h"

using namespace adaptcast;

namespace {

TimeSeries series_of(std::vector<double> values, Date start = make_date(2020, 10, 15)) {
    TimeSeries ts;
    for (std::size_t i = 0; i < values.size(); ++i) ts.dates.push_back(start + std::chrono::days(i));
    ts.values = std::move(values);
    return ts;
}

TimeSeries parse(const std::string& text, CsvSchema schema = {}) {
    std::istringstream in(text);
    return parse_csv(in, schema);
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("csv rows map to a dated series") {
    const auto ts = parse("date,cases\n2020-10-15,120\n2020-10-16,130\n2020-10-17,125\n");
    REQUIRE(ts.size() == 3);
    CHECK(ts.dates[0] == make_date(2020, 10, 15));
    CHECK(ts.dates[2] == make_date(2020, 10, 17));
    CHECK(ts.values == std::vector<double>{120, 130, 125});
}

TEST_CASE("out of order rows are sorted") {
    const auto sorted = parse("date,cases\n2020-10-15,120\n2020-10-16,130\n2020-10-17,125\n");
    const auto shuffled = parse("date,cases\n2020-10-17,125\n2020-10-15,120\n2020-10-16,130\n");
    CHECK(shuffled.dates == sorted.dates);
    CHECK(shuffled.values == sorted.values);
}

TEST_CASE("invalid month reports the row") {
    CsvSchema schema;
    schema.date_format = DateFormat::DayMonth;
    try {
        parse("date,cases\n14/10/20,100\n15/13/20,120\n", schema);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.row() == 3);
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("day-month dates and covariates are read") {
    const auto ts = parse("date,cases,icu\n\"15/10/20\",120,3\n16/10/20,130,\n", {"date", "cases", std::nullopt, DateFormat::DayMonth});
    REQUIRE(ts.size() == 2);
    CHECK(ts.dates[0] == make_date(2020, 10, 15));
    CHECK(ts.column("icu")[0] == 3.0);
    CHECK(is_missing(ts.column("icu")[1]));
}

TEST_CASE("malformed input is rejected") {
    CHECK_THROWS_AS(parse("date,cases\n2020-10-15,abc\n"), ParseError);
    CHECK_THROWS_AS(parse("date,cases\n2020-10-15,-4\n"), ParseError);
    CHECK_THROWS_AS(parse("date,cases\n2020-10-15,1\n2020-10-15,2\n"), DataError);
    CHECK_THROWS_AS(parse("day,cases\n2020-10-15,1\n"), ConfigError);
}

TEST_CASE("write then parse round trips") {
    auto ts = series_of({120.5, 130, 1e6});
    ts.covariates["icu"] = {1, 2, 3};
    std::stringstream buf;
    write_csv(buf, ts);
    const auto back = parse_csv(buf, CsvSchema{});
    CHECK(back.dates == ts.dates);
    CHECK(back.values == ts.values);
    CHECK(back.column("icu") == ts.column("icu"));
}

TEST_CASE("imputation uses the row mean") {
    auto ts = series_of({120, kMissing});
    ts.covariates["a"] = {1, 10};
    ts.covariates["b"] = {1, 20};
    const auto out = impute_missing(ts);
    CHECK(out.values[1] == doctest::Approx(15.0));
}

TEST_CASE("fully missing row copies the previous row") {
    const auto out = impute_missing(series_of({130, kMissing, 140}));
    CHECK(out.values == std::vector<double>{130, 130, 140});
}

TEST_CASE("imputation leaves complete data untouched") {
    auto ts = series_of({120, 130, 125});
    ts.covariates["a"] = {1, 2, 3};
    const auto out = impute_missing(ts);
    CHECK(out.values == ts.values);
    CHECK(out.covariates == ts.covariates);
    CHECK(out.dates == ts.dates);
}

TEST_CASE("calendar gaps are filled") {
    TimeSeries ts;
    ts.dates = {make_date(2020, 10, 15), make_date(2020, 10, 17)};
    ts.values = {120, 140};
    const auto out = impute_missing(ts);
    REQUIRE(out.size() == 3);
    CHECK(out.dates[1] == make_date(2020, 10, 16));
    CHECK(out.values[1] == 120);
}

TEST_CASE("leading fully missing row is an error") {
    CHECK_THROWS_AS(impute_missing(series_of({kMissing, 100})), DataError);
}

TEST_CASE("low counts are dropped") {
    auto ts = series_of({120, 90, 130});
    const auto out = filter_low_counts(ts, 100);
    CHECK(out.values == std::vector<double>{120, 130});
    CHECK(out.dates == std::vector<Date>{ts.dates[0], ts.dates[2]});
    CHECK(filter_low_counts(series_of({100, 200}), 100).values == std::vector<double>{100, 200});
    CHECK_THROWS_AS(filter_low_counts(series_of({1, 2, 99}), 100), DataError);
}

TEST_CASE("low-count filter is idempotent") {
    const auto once = filter_low_counts(series_of({120, 90, 130, 50, 101}), 100);
    const auto twice = filter_low_counts(once, 100);
    CHECK(twice.values == once.values);
    CHECK(twice.dates == once.dates);
}

TEST_CASE("fixed global max scaling") {
    const auto n = normalize(series_of({200, 400, 100}), ScaleMode::FixedGlobalMax);
    CHECK(n.series.values == std::vector<double>{0.5, 1.0, 0.25});
    for (std::size_t i = 0; i < 3; ++i) CHECK(n.scale.factor_at(i) == 400);
}

TEST_CASE("running max scaling uses the prefix max") {
    const std::vector<double> raw{200, 400, 100, 800, 300};
    const auto n = normalize(series_of(raw), ScaleMode::RunningMax);
    double prefix = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        prefix = std::max(prefix, raw[i]);
        CHECK(n.scale.factor_at(i) == prefix);
        CHECK(n.series.values[i] == raw[i] / prefix);
    }
    CHECK(std::vector<double>(n.series.values.begin(), n.series.values.begin() + 3) == std::vector<double>{1.0, 1.0, 0.25});
}

TEST_CASE("constant series normalizes to one") {
    for (double c : {0.5, 7.0, 12345.0}) {
        for (auto mode : {ScaleMode::FixedGlobalMax, ScaleMode::RunningMax}) {
            const auto n = normalize(series_of({c, c, c}), mode);
            CHECK(n.series.values == std::vector<double>{1.0, 1.0, 1.0});
        }
    }
}

TEST_CASE("normalization round trips") {
    const auto ts = generate_synthetic_stream(paper_like_synthetic_config(0.05, 3));
    for (auto mode : {ScaleMode::FixedGlobalMax, ScaleMode::RunningMax}) {
        const auto n = normalize(ts, mode);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CHECK(std::fabs(n.scale.denormalize(n.series.values[i], i) - ts.values[i]) <= 1e-12 * ts.values[i]);
        }
    }
}

TEST_CASE("non-positive scale is rejected") {
    const std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(Scale::fit(zeros, ScaleMode::RunningMax), DataError);
}

TEST_CASE("windowing follows the enumeration") {
    std::vector<double> v;
    for (int i = 1; i <= 10; ++i) v.push_back(i);
    const auto ts = series_of(v);

    const auto w31 = make_windows(ts, 3, 1);
    REQUIRE(w31.size() == 7);
    CHECK(w31[0].x == std::vector<double>{1, 2, 3});
    CHECK(w31[0].y == std::vector<double>{4});
    for (std::size_t i = 0; i < w31.size(); ++i) {
        CHECK(w31[i].x == std::vector<double>{v[i], v[i + 1], v[i + 2]});
        CHECK(w31[i].y == std::vector<double>{v[i + 3]});
        CHECK(w31[i].issue_date == ts.dates[i + 2]);
        CHECK(w31[i].target_dates == std::vector<Date>{ts.dates[i + 3]});
    }

    const auto w73 = make_windows(ts, 7, 3);
    REQUIRE(w73.size() == 1);
    CHECK(w73[0].x == std::vector<double>{1, 2, 3, 4, 5, 6, 7});
    CHECK(w73[0].y == std::vector<double>{8, 9, 10});

    CHECK_THROWS_AS(make_windows(series_of({1, 2, 3, 4, 5, 6, 7, 8, 9}), 7, 3), InsufficientDataError);
    CHECK_THROWS_AS(make_windows(ts, 0, 1), ConfigError);
}

TEST_CASE("window count law and overlap") {
    for (std::size_t len : {10u, 25u, 60u}) {
        std::vector<double> v(len);
        for (std::size_t i = 0; i < len; ++i) v[i] = static_cast<double>(i * i + 1);
        const auto ts = series_of(v);
        for (std::size_t W : {1u, 3u, 7u}) {
            for (std::size_t D : {1u, 2u, 3u}) {
                if (len < W + D) continue;
                const auto ex = make_windows(ts, W, D);
                CHECK(ex.size() == len - W - D + 1);
                for (std::size_t i = 1; i < ex.size(); ++i) {
                    CHECK(std::equal(ex[i - 1].x.begin() + 1, ex[i - 1].x.end(), ex[i].x.begin()));
                }
            }
        }
    }
}

TEST_CASE("noiseless wave hits its peak") {
    SyntheticConfig cfg;
    cfg.waves = {{0, 50, 100, 1000.0}};
    cfg.length = 101;
    cfg.noise = 0.0;
    const auto ts = generate_synthetic_stream(cfg);
    REQUIRE(ts.size() == 101);
    CHECK(ts.values[50] == 1000.0);
    CHECK(*std::max_element(ts.values.begin(), ts.values.end()) == 1000.0);
}

TEST_CASE("synthetic stream is deterministic per seed") {
    const auto a = generate_synthetic_stream(paper_like_synthetic_config(0.05, 7));
    const auto b = generate_synthetic_stream(paper_like_synthetic_config(0.05, 7));
    CHECK(a.values == b.values);
    CHECK(a.dates == b.dates);
    CHECK(a.size() == 724);
}

TEST_CASE("different seeds share the envelope") {
    const auto cfg1 = paper_like_synthetic_config(0.05, 1);
    const auto cfg2 = paper_like_synthetic_config(0.05, 2);
    const auto s1 = generate_synthetic_stream(cfg1);
    const auto s2 = generate_synthetic_stream(cfg2);
    CHECK(s1.values != s2.values);
    // Noiseless regeneration is the envelope; both noisy draws should sit
    // within 3 noise std-devs of it almost everywhere.
    auto clean_cfg = cfg1;
    clean_cfg.noise = 0.0;
    const auto clean = generate_synthetic_stream(clean_cfg);
    std::size_t inside = 0, total = 0;
    for (const auto* s : {&s1, &s2}) {
        for (std::size_t i = 0; i < clean.size(); ++i) {
            const double band = 3.0 * 0.05 * clean.values[i];
            if (std::fabs(s->values[i] - clean.values[i]) <= band + 1e-9 || s->values[i] == cfg1.floor) ++inside;
            ++total;
        }
    }
    CHECK(static_cast<double>(inside) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("overlapping waves are rejected") {
    SyntheticConfig cfg;
    cfg.waves = {{0, 20, 40, 500}, {30, 50, 70, 500}};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(generate_synthetic_stream(cfg), ConfigError);
}

}  // TEST_SUITE
