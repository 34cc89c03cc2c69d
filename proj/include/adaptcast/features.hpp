#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaptcast/time_series.hpp"

namespace adaptcast {

enum class Aggregator { Mean, Min, Max, Median, Range, StdDev };

Aggregator parse_aggregator(std::string_view name);
std::string_view to_string(Aggregator agg);

struct FeatureItem {
    std::string column;
    Aggregator aggregator;

    friend bool operator==(const FeatureItem&, const FeatureItem&) = default;
};

/// Parses "<column>:<aggregator>", e.g. "cases:max".
FeatureItem parse_feature_item(std::string_view text);

struct FeatureSpec {
    std::vector<FeatureItem> items;
    std::size_t window = 14;

    /// Structural checks only; see validate_against() for column lookups.
    void validate() const;
    void validate_against(const TimeSeries& ts) const;
};

/// Aggregate of an arbitrary sample. std-dev is the population formula and
/// the median of an even count averages the two middle values.
double aggregate(std::span<const double> sample, Aggregator agg);

/// Feature vector over stream positions [end_day - window + 1, end_day].
std::vector<double> aggregate_window(const TimeSeries& ts, std::size_t end_day, const FeatureSpec& spec);

/// The twenty aggregated features over a 14-day window used for the
/// feature-based experiments. Column names are snake_case; "cases" is the
/// case column.
FeatureSpec default_paper_spec();

}  // namespace adaptcast
