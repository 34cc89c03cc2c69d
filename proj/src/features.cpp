#include "adaptcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaptcast/errors.hpp"
#include "adaptcast/text.hpp"

namespace adaptcast {

Aggregator parse_aggregator(std::string_view name) {
    auto n = text::to_lower(name);
    if (n == "mean") return Aggregator::Mean;
    if (n == "min") return Aggregator::Min;
    if (n == "max") return Aggregator::Max;
    if (n == "median") return Aggregator::Median;
    if (n == "range") return Aggregator::Range;
    if (n == "std-dev" || n == "std" || n == "sd" || n == "stddev") return Aggregator::StdDev;
    throw ConfigError("unknown aggregator '" + std::string(name) + "'");
}

std::string_view to_string(Aggregator agg) {
    switch (agg) {
        case Aggregator::Mean: return "mean";
        case Aggregator::Min: return "min";
        case Aggregator::Max: return "max";
        case Aggregator::Median: return "median";
        case Aggregator::Range: return "range";
        case Aggregator::StdDev: return "std-dev";
    }
    return "?";
}

FeatureItem parse_feature_item(std::string_view text) {
    auto pos = text.rfind(':');
    if (pos == std::string_view::npos) {
        throw ConfigError("feature '" + std::string(text) + "' must be <column>:<aggregator>");
    }
    auto column = text::trim(text.substr(0, pos));
    if (column.empty()) throw ConfigError("feature '" + std::string(text) + "' has an empty column name");
    return {std::string(column), parse_aggregator(text::trim(text.substr(pos + 1)))};
}

void FeatureSpec::validate() const {
    if (items.empty()) throw ConfigError("feature spec has no items");
    if (window == 0) throw ConfigError("feature window must be at least 1");
    for (const auto& item : items) {
        if ((item.aggregator == Aggregator::StdDev || item.aggregator == Aggregator::Range) && window < 2) {
            throw ConfigError("feature window must be at least 2 for " + std::string(to_string(item.aggregator)));
        }
    }
}

void FeatureSpec::validate_against(const TimeSeries& ts) const {
    validate();
    for (const auto& item : items) {
        if (!ts.has_column(item.column)) throw ConfigError("feature refers to unknown column '" + item.column + "'");
    }
}

double aggregate(std::span<const double> sample, Aggregator agg) {
    if (sample.empty()) throw InsufficientDataError("cannot aggregate an empty window");
    const double n = static_cast<double>(sample.size());
    switch (agg) {
        case Aggregator::Mean:
            return std::accumulate(sample.begin(), sample.end(), 0.0) / n;
        case Aggregator::Min:
            return *std::min_element(sample.begin(), sample.end());
        case Aggregator::Max:
            return *std::max_element(sample.begin(), sample.end());
        case Aggregator::Range: {
            auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
            return *hi - *lo;
        }
        case Aggregator::Median: {
            std::vector<double> v(sample.begin(), sample.end());
            const std::size_t mid = v.size() / 2;
            std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
            double upper = v[mid];
            if (v.size() % 2 == 1) return upper;
            double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
            return 0.5 * (lower + upper);
        }
        case Aggregator::StdDev: {
            double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : sample) ss += (v - mean) * (v - mean);
            return std::sqrt(ss / n);
        }
    }
    return 0.0;
}

std::vector<double> aggregate_window(const TimeSeries& ts, std::size_t end_day, const FeatureSpec& spec) {
    spec.validate();
    if (end_day + 1 < spec.window) {
        throw InsufficientDataError("feature window of " + std::to_string(spec.window) + " days ending at position " +
                                    std::to_string(end_day) + " starts before the stream");
    }
    if (end_day >= ts.size()) {
        throw InsufficientDataError("feature window ends at position " + std::to_string(end_day) +
                                    " beyond stream of length " + std::to_string(ts.size()));
    }
    const std::size_t first = end_day + 1 - spec.window;
    std::vector<double> out;
    out.reserve(spec.items.size());
    for (const auto& item : spec.items) {
        const auto& col = ts.column(item.column);
        out.push_back(aggregate(std::span<const double>(col).subspan(first, spec.window), item.aggregator));
    }
    return out;
}

FeatureSpec default_paper_spec() {
    using A = Aggregator;
    return FeatureSpec{
        {
            {"school_closing", A::Mean},
            {"public_events_cancellation", A::Mean},
            {"cases", A::Min},
            {"cases", A::Max},
            {"unvaccinated_cases", A::Min},
            {"unvaccinated_cases", A::Median},
            {"second_dose_population", A::Min},
            {"second_dose_population", A::Range},
            {"second_dose_cases", A::Mean},
            {"second_dose_cases", A::Median},
            {"first_dose_cases", A::Median},
            {"first_dose_cases", A::Mean},
            {"weekly_deaths", A::Mean},
            {"workplace_closing", A::Mean},
            {"weekly_icu", A::Mean},
            {"weighted_stringency", A::Median},
            {"recovered", A::StdDev},
            {"cases_70_plus", A::Mean},
            {"first_dose_population", A::Median},
            {"cases_18_24", A::Mean},
        },
        14,
    };
}

}  // namespace adaptcast
