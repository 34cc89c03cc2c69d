#include "adaptcast/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "adaptcast/errors.hpp"
#include "adaptcast/text.hpp"

namespace adaptcast {

namespace fs = std::filesystem;

int exit_code_for(std::exception_ptr error) {
    try {
        std::rethrow_exception(error);
    } catch (const ConfigError&) {
        return kExitConfig;
    } catch (const DataError&) {
        return kExitData;
    } catch (const NumericError&) {
        return kExitNumeric;
    } catch (const ShapeError&) {
        return kExitNumeric;
    } catch (...) {
        return kExitFailure;
    }
}

TimeSeries load_series(const ExperimentConfig& cfg) {
    TimeSeries raw = cfg.source == DataSource::Csv ? parse_csv(cfg.csv_path, cfg.schema)
                                                   : generate_synthetic_stream(cfg.synthetic);
    return filter_low_counts(impute_missing(raw), cfg.low_count_threshold);
}

std::unique_ptr<Forecaster> make_forecaster(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.model == ModelKind::Ar) return std::make_unique<ArForecaster>(cfg.ar_fit_window);
    std::vector<std::size_t> arch{cfg.features ? cfg.features->items.size() : cfg.window};
    arch.insert(arch.end(), cfg.hidden.begin(), cfg.hidden.end());
    arch.push_back(cfg.horizon);
    TrainConfig train = cfg.train;
    train.seed = seed;
    return std::make_unique<MlpForecaster>(arch, train);
}

RepetitionResult run_repetition(const ExperimentConfig& cfg, const TimeSeries& series, std::size_t repetition) {
    RepetitionResult out;
    out.seed = cfg.seed + repetition;
    auto model = make_forecaster(cfg, out.seed);
    LoopOptions options;
    options.window = cfg.window;
    options.horizon = cfg.horizon;
    options.memory = cfg.memory;
    options.scale_mode = cfg.normalization;
    options.features = cfg.features;
    out.records = cfg.mode == LoopMode::Online ? run_online(series, *model, options)
                                               : run_offline(series, *model, options, cfg.pretrain_days);
    out.metrics = evaluate(out.records, cfg.segments);
    return out;
}

std::size_t effective_repetitions(const ExperimentConfig& cfg) {
    return cfg.model == ModelKind::Ar ? 1 : cfg.repetitions;
}

std::vector<std::string> config_warnings(const ExperimentConfig& cfg) {
    std::vector<std::string> warnings;
    if (cfg.model == ModelKind::Ar) {
        if (cfg.memory_explicit) warnings.push_back("M ignored for ar");
        if (cfg.repetitions > 1) warnings.push_back("ar is deterministic; repetitions collapsed to 1");
    } else if (cfg.mode == LoopMode::Offline && cfg.memory_explicit) {
        warnings.push_back("M ignored for offline mode");
    }
    return warnings;
}

fs::path output_root(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) return fs::path(env);
    return cfg.output_dir;
}

fs::path run_directory(const ExperimentConfig& cfg) {
    return output_root(cfg) / (cfg.name + "-" + cfg.hash_hex());
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(count, hw);
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < workers; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string plot_data(const std::vector<RepetitionResult>& reps) {
    std::ostringstream out;
    out << "date,actual,mean_prediction,std_prediction\n";
    const auto& first = reps.front().records;
    for (std::size_t i = 0; i < first.size(); ++i) {
        std::vector<double> preds;
        for (const auto& rep : reps) preds.push_back(rep.records[i].predicted.front());
        auto stats = mean_std(preds);
        out << format_iso(first[i].target_dates.front()) << ',';
        if (!first[i].realized.empty()) out << text::format_number(first[i].realized.front());
        out << ',' << text::format_number(stats.mean) << ',' << text::format_number(stats.stddev) << '\n';
    }
    return out.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.directory = run_directory(cfg);
    result.warnings = config_warnings(cfg);

    std::error_code ec;
    fs::remove_all(result.directory, ec);
    fs::create_directories(result.directory, ec);
    if (ec) throw IoError("cannot create '" + result.directory.string() + "': " + ec.message());

    try {
        write_file(result.directory / "config.snapshot",
                   "# config_hash = " + cfg.hash_hex() + "\n" + cfg.canonical_text());

        const TimeSeries series = load_series(cfg);
        const std::size_t reps = effective_repetitions(cfg);
        std::vector<RepetitionResult> runs(reps);
        parallel_for(reps, [&](std::size_t r) { runs[r] = run_repetition(cfg, series, r); });

        std::vector<MetricSet> sets;
        for (const auto& run : runs) sets.push_back(run.metrics);
        result.report = aggregate_repetitions(sets);

        std::string seeds;
        for (const auto& run : runs) seeds += (seeds.empty() ? "" : " ") + std::to_string(run.seed);
        auto& meta = result.report.metadata;
        meta = {
            {"config_hash", cfg.hash_hex()},
            {"name", cfg.name},
            {"model", std::string(to_string(cfg.model))},
            {"mode", std::string(to_string(cfg.mode))},
            {"W", std::to_string(cfg.features ? cfg.features->window : cfg.window)},
            {"D", std::to_string(cfg.horizon)},
            {"M", std::to_string(cfg.memory)},
            {"features", cfg.features ? std::to_string(cfg.features->items.size()) : "none"},
            {"normalization", std::string(to_string(cfg.normalization))},
            {"stream_length", std::to_string(series.size())},
            {"seeds", seeds},
        };
        for (const auto& w : result.warnings) meta.emplace_back("note", w);

        for (std::size_t r = 0; r < reps; ++r) {
            std::ostringstream csv;
            write_predictions_csv(csv, runs[r].records, cfg.horizon);
            write_file(result.directory / ("predictions_rep" + std::to_string(r) + ".csv"), csv.str());
        }
        std::ostringstream metrics_csv;
        write_metrics_csv(metrics_csv, result.report);
        write_file(result.directory / "metrics.csv", metrics_csv.str());

        std::ostringstream table;
        table << cfg.name << " (" << cfg.hash_hex() << ")\n";
        for (const auto& [k, v] : meta) {
            if (k != "name" && k != "config_hash") table << k << ": " << v << '\n';
        }
        table << '\n' << format_table(result.report);
        write_file(result.directory / "metrics.txt", table.str());

        write_file(result.directory / "plotdata.csv", plot_data(runs));
    } catch (const std::exception& e) {
        std::ofstream failed(result.directory / "FAILED", std::ios::binary);
        failed << e.what() << '\n';
        throw;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Grids

std::vector<GridRow> load_grid(const fs::path& grid_file) {
    std::ifstream in(grid_file);
    if (!in) throw ConfigError("cannot open grid file '" + grid_file.string() + "'");
    const fs::path grid_dir = grid_file.has_parent_path() ? grid_file.parent_path() : fs::path(".");
    const auto lines = parse_key_values(in);

    std::vector<ConfigEntry> base_entries;
    fs::path base_dir = grid_dir;
    std::vector<GridRow> rows;

    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path : (grid_dir / path).lexically_normal();
    };
    auto read_entries = [](const fs::path& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config '" + path.string() + "'");
        return parse_key_values(f);
    };

    for (const auto& line : lines) {
        const std::string where = grid_file.string() + ": line " + std::to_string(line.line) + ": ";
        if (line.key == "base") {
            auto path = resolve(line.value);
            base_entries = read_entries(path);
            base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
            continue;
        }
        GridRow row;
        try {
            if (line.key == "config") {
                row.label = line.value;
                row.config = load_config(resolve(line.value));
            } else if (line.key == "row") {
                row.label = line.value;
                std::vector<ConfigEntry> overrides;
                for (const auto& part : text::split(line.value, ';')) {
                    if (part.empty()) continue;
                    auto eq = part.find('=');
                    if (eq == std::string::npos) throw ConfigError("override '" + part + "' must be key=value");
                    overrides.push_back({std::string(text::trim(std::string_view(part).substr(0, eq))),
                                         std::string(text::trim(std::string_view(part).substr(eq + 1))), line.line});
                }
                std::vector<ConfigEntry> entries;
                for (const auto& e : base_entries) {
                    bool overridden = std::any_of(overrides.begin(), overrides.end(),
                                                  [&](const ConfigEntry& o) { return o.key == e.key; });
                    if (!overridden) entries.push_back(e);
                }
                entries.insert(entries.end(), overrides.begin(), overrides.end());
                row.config = config_from_entries(entries, base_dir);
            } else {
                throw ConfigError("unknown grid key '" + line.key + "' (expected base, row or config)");
            }
        } catch (const std::exception& e) {
            row.config.reset();
            row.error = where + e.what();
            row.exit_code = exit_code_for(std::current_exception());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("grid file '" + grid_file.string() + "' lists no configurations");
    return rows;
}

namespace {

std::map<std::string, std::string> collapsed_entries(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : cfg.canonical_entries()) {
        auto& slot = out[k];
        slot += (slot.empty() ? "" : "|") + v;
    }
    return out;
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

const char* const kSummarySegments[] = {kOverall, kWaves, kNormal};

}  // namespace

GridResult run_grid(const fs::path& grid_file, const std::optional<fs::path>& summary_path) {
    GridResult grid;
    for (auto& row : load_grid(grid_file)) {
        GridRowResult rr;
        rr.row = std::move(row);
        rr.exit_code = rr.row.exit_code;
        rr.error = rr.row.error;
        grid.rows.push_back(std::move(rr));
    }

    // Keys whose canonical value differs between rows, in canonical order.
    std::vector<std::map<std::string, std::string>> collapsed;
    std::vector<std::string> key_order;
    for (const auto& rr : grid.rows) {
        if (!rr.row.config) continue;
        collapsed.push_back(collapsed_entries(*rr.row.config));
        for (const auto& [k, v] : rr.row.config->canonical_entries()) {
            if (std::find(key_order.begin(), key_order.end(), k) == key_order.end()) key_order.push_back(k);
        }
    }
    for (const auto& key : key_order) {
        if (key == "name") continue;
        bool varies = false;
        for (const auto& c : collapsed) {
            auto a = c.count(key) ? c.at(key) : std::string();
            auto b = collapsed.front().count(key) ? collapsed.front().at(key) : std::string();
            varies = varies || a != b;
        }
        if (varies) grid.varied_keys.push_back(key);
    }
    for (const auto& rr : grid.rows) {
        std::vector<std::string> values;
        for (const auto& key : grid.varied_keys) {
            values.push_back(rr.row.config ? collapsed_entries(*rr.row.config)[key] : std::string());
        }
        grid.varied_values.push_back(std::move(values));
    }

    for (auto& rr : grid.rows) {
        if (!rr.row.config) continue;
        try {
            rr.result = run_experiment(*rr.row.config);
        } catch (const std::exception& e) {
            rr.exit_code = exit_code_for(std::current_exception());
            rr.error = e.what();
        }
    }

    if (summary_path) {
        grid.summary_path = *summary_path;
    } else {
        fs::path root = grid_file.has_parent_path() ? grid_file.parent_path() : fs::path(".");
        for (const auto& rr : grid.rows) {
            if (rr.row.config) {
                root = output_root(*rr.row.config);
                break;
            }
        }
        grid.summary_path = root / (grid_file.stem().string() + "_summary.csv");
    }

    std::ostringstream csv;
    csv << "row,label";
    for (const auto& k : grid.varied_keys) csv << ',' << k;
    csv << ",status,exit_code";
    for (const char* seg : kSummarySegments) {
        csv << ',' << seg << "_mae_mean," << seg << "_mae_std," << seg << "_mape_mean," << seg << "_mape_std";
    }
    csv << ",run_dir,error\n";
    for (std::size_t i = 0; i < grid.rows.size(); ++i) {
        const auto& rr = grid.rows[i];
        csv << i << ',' << csv_safe(rr.row.label);
        for (const auto& v : grid.varied_values[i]) csv << ',' << csv_safe(v);
        csv << ',' << (rr.result ? "ok" : "failed") << ',' << rr.exit_code;
        for (const char* seg : kSummarySegments) {
            const SegmentSummary* s = rr.result ? rr.result->report.find(seg) : nullptr;
            if (s) {
                csv << ',' << text::format_number(s->mae.mean) << ',' << text::format_number(s->mae.stddev) << ','
                    << text::format_number(s->mape.mean) << ',' << text::format_number(s->mape.stddev);
            } else {
                csv << ",,,,";
            }
        }
        csv << ',' << (rr.result ? csv_safe(rr.result->directory.string()) : std::string()) << ','
            << csv_safe(rr.error) << '\n';
    }
    std::error_code ec;
    if (grid.summary_path.has_parent_path()) fs::create_directories(grid.summary_path.parent_path(), ec);
    write_file(grid.summary_path, csv.str());
    return grid;
}

std::string format_grid_table(const GridResult& grid) {
    auto cell = [](const SegmentSummary* s, bool mape) -> std::string {
        if (!s) return "-";
        const auto& m = mape ? s->mape : s->mae;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.1f (%.1f)", m.mean, m.stddev);
        return buf;
    };

    std::vector<std::string> header = grid.varied_keys.empty() ? std::vector<std::string>{"config"} : grid.varied_keys;
    for (const char* seg : kSummarySegments) {
        header.push_back(std::string(seg) + " MAE");
        header.push_back(std::string(seg) + " MAPE");
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < grid.rows.size(); ++i) {
        const auto& rr = grid.rows[i];
        std::vector<std::string> row =
            grid.varied_keys.empty() ? std::vector<std::string>{rr.row.label} : grid.varied_values[i];
        for (const char* seg : kSummarySegments) {
            const SegmentSummary* s = rr.result ? rr.result->report.find(seg) : nullptr;
            if (!rr.result) {
                row.push_back("failed");
                row.push_back("");
            } else {
                row.push_back(cell(s, false));
                row.push_back(cell(s, true));
            }
        }
        rows.push_back(std::move(row));
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& r) {
        for (std::size_t c = 0; c < r.size(); ++c) {
            out << (c ? " | " : "") << r[c] << std::string(width[c] - r[c].size(), ' ');
        }
        out << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (auto w : width) total += w + 3;
    out << std::string(total > 3 ? total - 3 : 0, '-') << '\n';
    for (const auto& r : rows) emit(r);
    return out.str();
}

}  // namespace adaptcast
