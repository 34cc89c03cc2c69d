#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptcast/date.hpp"

namespace adaptcast {

/// Marker for an empty CSV cell. Only present before impute_missing().
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return v != v; }

/// Daily case counts with optional covariate columns, one entry per stream position.
///
/// After impute_missing() the dates are gap-free. filter_low_counts() removes
/// days and leaves calendar gaps; downstream code indexes by stream position
/// and only uses the dates for labeling.
struct TimeSeries {
    std::string value_name = "cases";
    std::vector<Date> dates;
    std::vector<double> values;
    std::map<std::string, std::vector<double>> covariates;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    bool has_missing() const;

    /// Case column (by its own name or the alias "cases") or a covariate.
    /// Throws ConfigError for an unknown name.
    const std::vector<double>& column(std::string_view name) const;
    bool has_column(std::string_view name) const;

    /// Throws DataError when the structural invariants do not hold:
    /// strictly increasing dates, matching column lengths, and (unless
    /// `allow_missing`) finite non-negative case values.
    void validate(bool allow_missing = false) const;
};

struct CsvSchema {
    std::string date_column = "date";
    std::string value_column = "cases";
    /// nullopt: every other column is a covariate.
    std::optional<std::vector<std::string>> covariate_columns;
    DateFormat date_format = DateFormat::Iso;
};

TimeSeries parse_csv(const std::filesystem::path& path, const CsvSchema& schema);
TimeSeries parse_csv(std::istream& in, const CsvSchema& schema);

/// ISO dates, 10 significant digits.
void write_csv(std::ostream& out, const TimeSeries& ts);
void write_csv(const std::filesystem::path& path, const TimeSeries& ts);

/// Fills calendar gaps and empty cells. A partially missing row takes the
/// mean of that row's available numeric cells; a fully missing row copies the
/// previous row.
TimeSeries impute_missing(const TimeSeries& ts);

TimeSeries filter_low_counts(const TimeSeries& ts, double threshold = 100.0);

enum class ScaleMode { FixedGlobalMax, RunningMax };

ScaleMode parse_scale_mode(std::string_view name);
std::string_view to_string(ScaleMode mode);

/// Per-position divisor. Under RunningMax the factor at position t is the max
/// over positions <= t, so it never depends on later data.
class Scale {
public:
    /// Throws DataError when the relevant maximum is not positive.
    static Scale fit(std::span<const double> values, ScaleMode mode);

    /// Like fit() over |values|, but a non-positive maximum yields factor 1.
    /// Used for covariates, which may legitimately be all zero.
    static Scale fit_lenient(std::span<const double> values, ScaleMode mode);

    ScaleMode mode() const noexcept { return mode_; }
    std::size_t size() const noexcept { return factors_.size(); }
    double factor_at(std::size_t position) const;
    double normalize(double value, std::size_t position) const { return value / factor_at(position); }
    double denormalize(double value, std::size_t position) const { return value * factor_at(position); }

private:
    Scale(ScaleMode mode, std::vector<double> factors) : mode_(mode), factors_(std::move(factors)) {}

    ScaleMode mode_;
    std::vector<double> factors_;
};

struct NormalizedSeries {
    TimeSeries series;
    Scale scale;
    std::map<std::string, Scale> covariate_scales;
};

/// Divides each value by its own position's factor. Covariates are scaled
/// per column with fit_lenient().
NormalizedSeries normalize(const TimeSeries& ts, ScaleMode mode);

struct WindowedExample {
    std::vector<double> x;
    std::vector<double> y;
    Date issue_date;
    std::vector<Date> target_dates;
};

/// Returns size - window - horizon + 1 examples, x ordered most-recent-last.
std::vector<WindowedExample> make_windows(const TimeSeries& ts, std::size_t window, std::size_t horizon);

struct WaveSpec {
    int start_day;
    int peak_day;
    int end_day;
    double peak_height;
};

struct SyntheticConfig {
    std::vector<WaveSpec> waves;
    int length = 724;
    double baseline = 150.0;
    /// Std-dev of the multiplicative Gaussian noise, as a fraction of the envelope.
    double noise = 0.0;
    std::uint64_t seed = 0;
    Date start_date = make_date(2020, 10, 15);
    double floor = 100.0;

    void validate() const;
};

/// Five waves centred on the default wave periods with heights shaped after
/// the Cyprus 2020-2022 case curve.
SyntheticConfig paper_like_synthetic_config(double noise = 0.05, std::uint64_t seed = 0);

/// Noise-free wave envelope at `day`.
double synthetic_envelope(const SyntheticConfig& config, int day);

/// Log-linear rise and decay through each peak over a flat baseline, times
/// (1 + noise * z) with z ~ N(0, 1), clipped below at config.floor.
TimeSeries generate_synthetic_stream(const SyntheticConfig& config);

}  // namespace adaptcast
