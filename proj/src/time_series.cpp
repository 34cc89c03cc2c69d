#include "adaptcast/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "adaptcast/errors.hpp"
#include "adaptcast/text.hpp"

namespace adaptcast {

bool TimeSeries::has_missing() const {
    auto any_missing = [](const std::vector<double>& col) {
        return std::any_of(col.begin(), col.end(), is_missing);
    };
    if (any_missing(values)) return true;
    for (const auto& [name, col] : covariates) {
        if (any_missing(col)) return true;
    }
    return false;
}

bool TimeSeries::has_column(std::string_view name) const {
    return name == "cases" || name == value_name || covariates.count(std::string(name)) > 0;
}

const std::vector<double>& TimeSeries::column(std::string_view name) const {
    if (name == value_name || name == "cases") return values;
    auto it = covariates.find(std::string(name));
    if (it == covariates.end()) {
        throw ConfigError("unknown column '" + std::string(name) + "'");
    }
    return it->second;
}

void TimeSeries::validate(bool allow_missing) const {
    if (dates.size() != values.size()) {
        throw DataError("date and value columns differ in length");
    }
    for (const auto& [name, col] : covariates) {
        if (col.size() != values.size()) {
            throw DataError("covariate '" + name + "' does not have one value per date");
        }
    }
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (dates[i] <= dates[i - 1]) {
            throw DataError("dates not strictly increasing at " + format_iso(dates[i]));
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (is_missing(v)) {
            if (!allow_missing) throw DataError("missing case value on " + format_iso(dates[i]));
            continue;
        }
        if (!std::isfinite(v) || v < 0.0) {
            throw DataError("invalid case value on " + format_iso(dates[i]));
        }
    }
}

// ---------------------------------------------------------------------------
// CSV

TimeSeries parse_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return parse_csv(in, schema);
}

TimeSeries parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!text::trim(line).empty()) {
            header = text::split(line, ',');
            break;
        }
    }
    if (header.empty()) throw DataError("CSV has no header row");

    auto find_col = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_idx = find_col(schema.date_column);
    const std::size_t value_idx = find_col(schema.value_column);

    std::vector<std::pair<std::string, std::size_t>> cov_cols;
    if (schema.covariate_columns) {
        for (const auto& name : *schema.covariate_columns) cov_cols.emplace_back(name, find_col(name));
    } else {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i != date_idx && i != value_idx) cov_cols.emplace_back(header[i], i);
        }
    }

    struct Row {
        Date date;
        double value;
        std::vector<double> covs;
        std::size_t line;
    };
    std::vector<Row> rows;

    auto cell_value = [&](const std::string& cell, const std::string& col) {
        if (cell.empty()) return kMissing;
        auto v = text::parse_double(cell);
        if (!v) throw ParseError("column '" + col + "': not a number '" + cell + "'", line_no);
        return *v;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        auto fields = text::split(line, ',');
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        auto date = parse_date(fields[date_idx], schema.date_format);
        if (!date) throw ParseError("invalid date '" + fields[date_idx] + "'", line_no);
        Row row{*date, cell_value(fields[value_idx], schema.value_column), {}, line_no};
        if (!is_missing(row.value) && row.value < 0.0) {
            throw ParseError("negative case count", line_no);
        }
        for (const auto& [name, idx] : cov_cols) row.covs.push_back(cell_value(fields[idx], name));
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date) {
            throw DataError("duplicate date " + format_iso(rows[i].date) + " (rows " +
                            std::to_string(rows[i - 1].line) + " and " + std::to_string(rows[i].line) + ")");
        }
    }

    TimeSeries ts;
    ts.value_name = schema.value_column;
    for (const auto& [name, idx] : cov_cols) ts.covariates[name];
    for (const auto& row : rows) {
        ts.dates.push_back(row.date);
        ts.values.push_back(row.value);
        for (std::size_t k = 0; k < cov_cols.size(); ++k) {
            ts.covariates[cov_cols[k].first].push_back(row.covs[k]);
        }
    }
    return ts;
}

void write_csv(std::ostream& out, const TimeSeries& ts) {
    out << "date," << ts.value_name;
    for (const auto& [name, col] : ts.covariates) out << ',' << name;
    out << '\n';
    auto cell = [](double v) { return is_missing(v) ? std::string() : text::format_number(v); };
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << format_iso(ts.dates[i]) << ',' << cell(ts.values[i]);
        for (const auto& [name, col] : ts.covariates) out << ',' << cell(col[i]);
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const TimeSeries& ts) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    write_csv(out, ts);
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Preprocessing

TimeSeries impute_missing(const TimeSeries& ts) {
    ts.validate(/*allow_missing=*/true);
    if (ts.empty()) throw DataError("cannot impute an empty series");
    if (std::all_of(ts.values.begin(), ts.values.end(), is_missing)) {
        throw DataError("no observed case values");
    }

    TimeSeries out;
    out.value_name = ts.value_name;
    for (const auto& [name, col] : ts.covariates) out.covariates[name];

    // Row layout: [value, covariates in map order].
    std::vector<double> previous;
    auto emit = [&](Date date, std::vector<double> row) {
        std::vector<double> available;
        for (double v : row) {
            if (!is_missing(v)) available.push_back(v);
        }
        if (available.empty()) {
            if (previous.empty()) {
                throw DataError("first day " + format_iso(date) + " is fully missing");
            }
            row = previous;
        } else if (available.size() < row.size()) {
            double mean = std::accumulate(available.begin(), available.end(), 0.0) /
                          static_cast<double>(available.size());
            for (double& v : row) {
                if (is_missing(v)) v = mean;
            }
        }
        out.dates.push_back(date);
        out.values.push_back(row[0]);
        std::size_t k = 1;
        for (auto& [name, col] : out.covariates) col.push_back(row[k++]);
        previous = std::move(row);
    };

    const std::size_t width = 1 + ts.covariates.size();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i > 0) {
            for (Date d = ts.dates[i - 1] + std::chrono::days{1}; d < ts.dates[i]; d += std::chrono::days{1}) {
                emit(d, std::vector<double>(width, kMissing));
            }
        }
        std::vector<double> row{ts.values[i]};
        for (const auto& [name, col] : ts.covariates) row.push_back(col[i]);
        emit(ts.dates[i], std::move(row));
    }
    return out;
}

TimeSeries filter_low_counts(const TimeSeries& ts, double threshold) {
    ts.validate();
    TimeSeries out;
    out.value_name = ts.value_name;
    for (const auto& [name, col] : ts.covariates) out.covariates[name];
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts.values[i] < threshold) continue;
        out.dates.push_back(ts.dates[i]);
        out.values.push_back(ts.values[i]);
        for (const auto& [name, col] : ts.covariates) out.covariates[name].push_back(col[i]);
    }
    if (out.empty()) {
        throw DataError("no days with at least " + text::format_number(threshold) + " cases");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scaling

ScaleMode parse_scale_mode(std::string_view name) {
    if (name == "running-max") return ScaleMode::RunningMax;
    if (name == "fixed-global-max") return ScaleMode::FixedGlobalMax;
    throw ConfigError("unknown normalization '" + std::string(name) +
                      "' (expected running-max or fixed-global-max)");
}

std::string_view to_string(ScaleMode mode) {
    return mode == ScaleMode::RunningMax ? "running-max" : "fixed-global-max";
}

namespace {

std::vector<double> max_factors(std::span<const double> values, ScaleMode mode) {
    std::vector<double> factors(values.size());
    if (mode == ScaleMode::FixedGlobalMax) {
        double m = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
        std::fill(factors.begin(), factors.end(), m);
    } else {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < values.size(); ++i) {
            m = std::max(m, values[i]);
            factors[i] = m;
        }
    }
    return factors;
}

}  // namespace

Scale Scale::fit(std::span<const double> values, ScaleMode mode) {
    if (values.empty()) throw DataError("cannot scale an empty series");
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("cannot scale non-finite values");
    }
    auto factors = max_factors(values, mode);
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (!(factors[i] > 0.0)) {
            throw DataError("non-positive scale factor at position " + std::to_string(i));
        }
    }
    return Scale(mode, std::move(factors));
}

Scale Scale::fit_lenient(std::span<const double> values, ScaleMode mode) {
    std::vector<double> magnitudes(values.size());
    std::transform(values.begin(), values.end(), magnitudes.begin(), [](double v) { return std::fabs(v); });
    auto factors = max_factors(magnitudes, mode);
    for (double& f : factors) {
        if (!(f > 0.0)) f = 1.0;
    }
    return Scale(mode, std::move(factors));
}

double Scale::factor_at(std::size_t position) const {
    if (position >= factors_.size()) {
        throw ShapeError("scale position " + std::to_string(position) + " out of range");
    }
    return factors_[position];
}

NormalizedSeries normalize(const TimeSeries& ts, ScaleMode mode) {
    ts.validate();
    NormalizedSeries out{ts, Scale::fit(ts.values, mode), {}};
    for (std::size_t i = 0; i < ts.size(); ++i) out.series.values[i] = out.scale.normalize(ts.values[i], i);
    for (auto& [name, col] : out.series.covariates) {
        auto scale = Scale::fit_lenient(col, mode);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = scale.normalize(col[i], i);
        out.covariate_scales.emplace(name, std::move(scale));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Windows

std::vector<WindowedExample> make_windows(const TimeSeries& ts, std::size_t window, std::size_t horizon) {
    if (window == 0 || horizon == 0) throw ConfigError("window and horizon must be at least 1");
    if (ts.size() < window + horizon) {
        throw InsufficientDataError("series of length " + std::to_string(ts.size()) +
                                    " is shorter than window + horizon = " + std::to_string(window + horizon));
    }
    const std::size_t count = ts.size() - window - horizon + 1;
    std::vector<WindowedExample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        WindowedExample ex;
        ex.x.assign(ts.values.begin() + static_cast<std::ptrdiff_t>(i),
                    ts.values.begin() + static_cast<std::ptrdiff_t>(i + window));
        ex.y.assign(ts.values.begin() + static_cast<std::ptrdiff_t>(i + window),
                    ts.values.begin() + static_cast<std::ptrdiff_t>(i + window + horizon));
        ex.issue_date = ts.dates[i + window - 1];
        ex.target_dates.assign(ts.dates.begin() + static_cast<std::ptrdiff_t>(i + window),
                               ts.dates.begin() + static_cast<std::ptrdiff_t>(i + window + horizon));
        out.push_back(std::move(ex));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Synthetic streams

void SyntheticConfig::validate() const {
    if (length < 1) throw ConfigError("synthetic length must be at least 1");
    if (!(baseline > 0.0)) throw ConfigError("synthetic baseline must be positive");
    if (!(noise >= 0.0)) throw ConfigError("synthetic noise must be non-negative");
    if (!(floor >= 0.0)) throw ConfigError("synthetic floor must be non-negative");
    auto sorted = waves;
    std::sort(sorted.begin(), sorted.end(), [](const WaveSpec& a, const WaveSpec& b) { return a.start_day < b.start_day; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& w = sorted[i];
        if (!(w.start_day <= w.peak_day && w.peak_day <= w.end_day)) {
            throw ConfigError("wave must satisfy start <= peak <= end");
        }
        // A wave may run past the last day; the stream then ends mid-wave.
        if (w.start_day < 0) throw ConfigError("wave start day must be non-negative");
        if (!(w.peak_height > 0.0)) throw ConfigError("wave peak height must be positive");
        if (i > 0 && w.start_day < sorted[i - 1].end_day) {
            throw ConfigError("overlapping waves starting at days " + std::to_string(sorted[i - 1].start_day) +
                              " and " + std::to_string(w.start_day));
        }
    }
}

SyntheticConfig paper_like_synthetic_config(double noise, std::uint64_t seed) {
    SyntheticConfig cfg;
    cfg.noise = noise;
    cfg.seed = seed;
    struct Period {
        Date first, last;
        double height;
    };
    const Period periods[] = {
        {make_date(2020, 12, 13), make_date(2021, 1, 11), 900.0},
        {make_date(2021, 4, 4), make_date(2021, 5, 3), 1000.0},
        {make_date(2021, 7, 2), make_date(2021, 7, 31), 1300.0},
        {make_date(2021, 12, 19), make_date(2022, 1, 7), 5500.0},
        {make_date(2022, 6, 17), make_date(2022, 7, 26), 4000.0},
    };
    constexpr int kRamp = 20;
    for (const auto& p : periods) {
        int first = static_cast<int>((p.first - cfg.start_date).count());
        int last = static_cast<int>((p.last - cfg.start_date).count());
        cfg.waves.push_back({first - kRamp, (first + last) / 2, last + kRamp, p.height});
    }
    return cfg;
}

double synthetic_envelope(const SyntheticConfig& config, int day) {
    for (const auto& w : config.waves) {
        if (day < w.start_day || day > w.end_day) continue;
        if (day == w.peak_day) return w.peak_height;
        if (day < w.peak_day) {
            double frac = static_cast<double>(day - w.start_day) / (w.peak_day - w.start_day);
            return config.baseline * std::pow(w.peak_height / config.baseline, frac);
        }
        double frac = static_cast<double>(day - w.peak_day) / (w.end_day - w.peak_day);
        return w.peak_height * std::pow(config.baseline / w.peak_height, frac);
    }
    return config.baseline;
}

TimeSeries generate_synthetic_stream(const SyntheticConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    TimeSeries ts;
    ts.dates.reserve(static_cast<std::size_t>(config.length));
    ts.values.reserve(static_cast<std::size_t>(config.length));
    for (int day = 0; day < config.length; ++day) {
        double v = synthetic_envelope(config, day);
        if (config.noise > 0.0) v *= 1.0 + config.noise * gauss(rng);
        ts.dates.push_back(config.start_date + std::chrono::days{day});
        ts.values.push_back(std::max(v, config.floor));
    }
    return ts;
}

}  // namespace adaptcast
