#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adaptcast/adaptive_loop.hpp"
#include "adaptcast/date.hpp"

namespace adaptcast {

inline constexpr double kMapeGuard = 1e-8;

/// Mean over records of the per-record horizon-averaged absolute error.
double mae(std::span<const ForecastRecord> records);

/// Mean over records of (100 / D) * sum_d |y_d - yhat_d| / |y_d|, in percent.
double mape(std::span<const ForecastRecord> records);

/// Keeps records whose whole horizon lies inside the stream.
std::vector<ForecastRecord> fully_realized(std::span<const ForecastRecord> records);

struct DateRange {
    std::string name;
    Date first;
    Date last;  // inclusive

    bool contains(Date d) const noexcept { return first <= d && d <= last; }
};

struct SegmentSpec {
    std::vector<DateRange> waves;

    /// The five wave periods of the Cyprus 2020-2022 data set.
    static SegmentSpec paper_default();

    /// Throws ConfigError for inverted or overlapping ranges.
    void validate() const;
};

inline constexpr const char* kOverall = "overall";
inline constexpr const char* kWaves = "waves";
inline constexpr const char* kNormal = "normal";

/// Ordered (segment name, records) pairs: overall, waves, normal, then each
/// wave by name. A record belongs to the segment of its first target date.
using SegmentedRecords = std::vector<std::pair<std::string, std::vector<ForecastRecord>>>;

SegmentedRecords segment(std::span<const ForecastRecord> records, const SegmentSpec& spec);

struct SegmentMetrics {
    std::string segment;
    std::size_t count = 0;
    double mae = 0.0;
    double mape = 0.0;
};

/// Metrics of one repetition; segments with no realized record are omitted.
using MetricSet = std::vector<SegmentMetrics>;

MetricSet evaluate(std::span<const ForecastRecord> records, const SegmentSpec& spec);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Population mean and standard deviation.
MeanStd mean_std(std::span<const double> values);

struct SegmentSummary {
    std::string segment;
    std::size_t count = 0;
    MeanStd mae;
    MeanStd mape;
};

struct MetricsReport {
    std::vector<SegmentSummary> segments;
    std::size_t repetitions = 0;
    /// Ordered key/value pairs such as config hash, seeds, W, D, M.
    std::vector<std::pair<std::string, std::string>> metadata;

    const SegmentSummary* find(std::string_view segment) const;
};

MetricsReport aggregate_repetitions(std::span<const MetricSet> repetitions);

/// Aligned text table, one row per segment: "MAE mean (std)  MAPE mean (std)".
std::string format_table(const MetricsReport& report);

/// Metadata as leading "# key=value" lines, then
/// segment,metric,mean,std,repetitions,records with one row per (segment, metric).
void write_metrics_csv(std::ostream& out, const MetricsReport& report);
MetricsReport read_metrics_csv(std::istream& in);

}  // namespace adaptcast
