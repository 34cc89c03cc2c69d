#include "adaptcast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "adaptcast/errors.hpp"
#include "adaptcast/text.hpp"

namespace adaptcast {

namespace {

void require_realized(std::span<const ForecastRecord> records, const char* metric) {
    if (records.empty()) throw EvaluationError(std::string(metric) + " of an empty record list");
    for (const auto& rec : records) {
        if (!rec.fully_realized() || rec.predicted.empty()) {
            throw EvaluationError(std::string(metric) + ": record issued " + format_iso(rec.issue_date) +
                                  " is not fully realized");
        }
    }
}

}  // namespace

double mae(std::span<const ForecastRecord> records) {
    require_realized(records, "MAE");
    double total = 0.0;
    for (const auto& rec : records) {
        double s = 0.0;
        for (std::size_t d = 0; d < rec.predicted.size(); ++d) s += std::fabs(rec.realized[d] - rec.predicted[d]);
        total += s / static_cast<double>(rec.predicted.size());
    }
    return total / static_cast<double>(records.size());
}

double mape(std::span<const ForecastRecord> records) {
    require_realized(records, "MAPE");
    std::vector<std::string> flagged;
    for (const auto& rec : records) {
        for (std::size_t d = 0; d < rec.realized.size(); ++d) {
            if (std::fabs(rec.realized[d]) < kMapeGuard) flagged.push_back(format_iso(rec.target_dates[d]));
        }
    }
    if (!flagged.empty()) {
        std::string list;
        for (const auto& f : flagged) list += (list.empty() ? "" : ", ") + f;
        throw EvaluationError("MAPE undefined for near-zero actuals on " + list);
    }
    double total = 0.0;
    for (const auto& rec : records) {
        double s = 0.0;
        for (std::size_t d = 0; d < rec.predicted.size(); ++d) {
            s += std::fabs(rec.realized[d] - rec.predicted[d]) / std::fabs(rec.realized[d]);
        }
        total += 100.0 * s / static_cast<double>(rec.predicted.size());
    }
    return total / static_cast<double>(records.size());
}

std::vector<ForecastRecord> fully_realized(std::span<const ForecastRecord> records) {
    std::vector<ForecastRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [](const ForecastRecord& r) { return r.fully_realized(); });
    return out;
}

// ---------------------------------------------------------------------------
// Segments

SegmentSpec SegmentSpec::paper_default() {
    return SegmentSpec{{
        {"Wave 1", make_date(2020, 12, 13), make_date(2021, 1, 11)},
        {"Wave 2", make_date(2021, 4, 4), make_date(2021, 5, 3)},
        {"Wave 3", make_date(2021, 7, 2), make_date(2021, 7, 31)},
        {"Wave 4", make_date(2021, 12, 19), make_date(2022, 1, 7)},
        {"Wave 5", make_date(2022, 6, 17), make_date(2022, 7, 26)},
    }};
}

void SegmentSpec::validate() const {
    for (std::size_t i = 0; i < waves.size(); ++i) {
        const auto& a = waves[i];
        if (a.name.empty()) throw ConfigError("segment with empty name");
        if (a.name == kOverall || a.name == kWaves || a.name == kNormal) {
            throw ConfigError("segment name '" + a.name + "' is reserved");
        }
        if (a.last < a.first) throw ConfigError("segment '" + a.name + "' ends before it starts");
        for (std::size_t j = 0; j < i; ++j) {
            const auto& b = waves[j];
            if (a.name == b.name) throw ConfigError("duplicate segment name '" + a.name + "'");
            if (a.first <= b.last && b.first <= a.last) {
                throw ConfigError("segments '" + b.name + "' and '" + a.name + "' overlap");
            }
        }
    }
}

SegmentedRecords segment(std::span<const ForecastRecord> records, const SegmentSpec& spec) {
    spec.validate();
    SegmentedRecords out;
    out.emplace_back(kOverall, std::vector<ForecastRecord>(records.begin(), records.end()));
    out.emplace_back(kWaves, std::vector<ForecastRecord>{});
    out.emplace_back(kNormal, std::vector<ForecastRecord>{});
    std::vector<std::vector<ForecastRecord>> per_wave(spec.waves.size());

    for (const auto& rec : records) {
        const Date key = rec.target_dates.empty() ? rec.issue_date + std::chrono::days{1} : rec.target_dates.front();
        auto it = std::find_if(spec.waves.begin(), spec.waves.end(), [key](const DateRange& r) { return r.contains(key); });
        if (it == spec.waves.end()) {
            out[2].second.push_back(rec);
        } else {
            per_wave[static_cast<std::size_t>(it - spec.waves.begin())].push_back(rec);
        }
    }
    // waves = concatenation of the per-wave subsets in spec order.
    for (std::size_t w = 0; w < spec.waves.size(); ++w) {
        auto& union_set = out[1].second;
        union_set.insert(union_set.end(), per_wave[w].begin(), per_wave[w].end());
    }
    for (std::size_t w = 0; w < spec.waves.size(); ++w) out.emplace_back(spec.waves[w].name, std::move(per_wave[w]));
    return out;
}

MetricSet evaluate(std::span<const ForecastRecord> records, const SegmentSpec& spec) {
    const auto realized = fully_realized(records);
    MetricSet out;
    for (const auto& [name, subset] : segment(realized, spec)) {
        if (subset.empty()) continue;
        out.push_back({name, subset.size(), mae(subset), mape(subset)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) throw EvaluationError("mean of an empty sample");
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / n)};
}

const SegmentSummary* MetricsReport::find(std::string_view segment) const {
    for (const auto& s : segments) {
        if (s.segment == segment) return &s;
    }
    return nullptr;
}

MetricsReport aggregate_repetitions(std::span<const MetricSet> repetitions) {
    if (repetitions.empty()) throw EvaluationError("no repetitions to aggregate");
    const auto& first = repetitions.front();
    for (std::size_t r = 1; r < repetitions.size(); ++r) {
        const auto& rep = repetitions[r];
        bool same = rep.size() == first.size();
        for (std::size_t i = 0; same && i < rep.size(); ++i) {
            same = rep[i].segment == first[i].segment && rep[i].count == first[i].count;
        }
        if (!same) throw EvaluationError("repetition " + std::to_string(r) + " has different segment keys");
    }

    MetricsReport report;
    report.repetitions = repetitions.size();
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> maes, mapes;
        for (const auto& rep : repetitions) {
            maes.push_back(rep[i].mae);
            mapes.push_back(rep[i].mape);
        }
        report.segments.push_back({first[i].segment, first[i].count, mean_std(maes), mean_std(mapes)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_table(const MetricsReport& report) {
    auto cell = [](const MeanStd& m) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f (%.1f)", m.mean, m.stddev);
        return std::string(buf);
    };
    std::size_t name_width = 7;
    for (const auto& s : report.segments) name_width = std::max(name_width, s.segment.size());

    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-*s  %8s  %-20s  %-20s\n", static_cast<int>(name_width), "Segment", "Records",
                  "MAE", "MAPE (%)");
    out << line;
    out << std::string(name_width + 2 + 8 + 2 + 20 + 2 + 20, '-') << '\n';
    for (const auto& s : report.segments) {
        std::snprintf(line, sizeof line, "%-*s  %8zu  %-20s  %-20s\n", static_cast<int>(name_width), s.segment.c_str(),
                      s.count, cell(s.mae).c_str(), cell(s.mape).c_str());
        out << line;
    }
    out << "Repetitions: " << report.repetitions << '\n';
    return out.str();
}

void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
    for (const auto& [key, value] : report.metadata) out << "# " << key << '=' << value << '\n';
    out << "segment,metric,mean,std,repetitions,records\n";
    for (const auto& s : report.segments) {
        out << s.segment << ",MAE," << text::format_number(s.mae.mean) << ',' << text::format_number(s.mae.stddev)
            << ',' << report.repetitions << ',' << s.count << '\n';
        out << s.segment << ",MAPE," << text::format_number(s.mape.mean) << ','
            << text::format_number(s.mape.stddev) << ',' << report.repetitions << ',' << s.count << '\n';
    }
}

MetricsReport read_metrics_csv(std::istream& in) {
    MetricsReport report;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++line_no;
        auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            auto body = text::trim(trimmed.substr(1));
            auto eq = body.find('=');
            if (eq != std::string_view::npos) {
                report.metadata.emplace_back(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
            }
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto f = text::split(trimmed, ',');
        if (f.size() != 6) throw ParseError("metrics row needs 6 fields", line_no);
        auto mean = text::parse_double(f[2]);
        auto stddev = text::parse_double(f[3]);
        auto reps = text::parse_int(f[4]);
        auto count = text::parse_int(f[5]);
        if (!mean || !stddev || !reps || !count) throw ParseError("malformed metrics row", line_no);
        auto [it, inserted] = index.emplace(f[0], report.segments.size());
        if (inserted) report.segments.push_back({f[0], static_cast<std::size_t>(*count), {}, {}});
        auto& seg = report.segments[it->second];
        if (f[1] == "MAE") {
            seg.mae = {*mean, *stddev};
        } else if (f[1] == "MAPE") {
            seg.mape = {*mean, *stddev};
        } else {
            throw ParseError("unknown metric '" + f[1] + "'", line_no);
        }
        report.repetitions = static_cast<std::size_t>(*reps);
    }
    if (!header_seen) throw DataError("metrics CSV has no header");
    return report;
}

}  // namespace adaptcast
