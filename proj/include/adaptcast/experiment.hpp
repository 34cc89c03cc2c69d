#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adaptcast/adaptive_loop.hpp"
#include "adaptcast/config.hpp"
#include "adaptcast/evaluation.hpp"

namespace adaptcast {

/// Environment variable that overrides every config's output_dir.
inline constexpr const char* kOutputRootEnv = "ADAPTCAST_OUTPUT_ROOT";

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitData = 3,
    kExitNumeric = 4,
};

int exit_code_for(std::exception_ptr error);

/// Raw CSV or synthetic stream, imputed and with low-count days removed.
TimeSeries load_series(const ExperimentConfig& cfg);

std::unique_ptr<Forecaster> make_forecaster(const ExperimentConfig& cfg, std::uint64_t seed);

struct RepetitionResult {
    std::uint64_t seed = 0;
    std::vector<ForecastRecord> records;
    MetricSet metrics;
};

RepetitionResult run_repetition(const ExperimentConfig& cfg, const TimeSeries& series, std::size_t repetition);

/// Repetitions actually executed; the AR model is deterministic so it runs once.
std::size_t effective_repetitions(const ExperimentConfig& cfg);

std::vector<std::string> config_warnings(const ExperimentConfig& cfg);

std::filesystem::path output_root(const ExperimentConfig& cfg);

/// `<output root>/<name>-<config hash>`
std::filesystem::path run_directory(const ExperimentConfig& cfg);

struct ExperimentResult {
    std::filesystem::path directory;
    MetricsReport report;
    std::vector<std::string> warnings;
};

/// Runs every repetition (in parallel) and writes config.snapshot,
/// predictions_rep<r>.csv, metrics.csv, metrics.txt and plotdata.csv. On
/// failure the directory gets a FAILED file holding the error and the
/// exception propagates.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct GridRow {
    std::string label;
    std::optional<ExperimentConfig> config;
    std::string error;  // set when the row's config failed to load
    int exit_code = kExitOk;
};

/// Grid file syntax, one entry per line:
///   base = <config path>              applies to the following rows
///   row = key=value; key=value        base config with overrides
///   config = <config path>            a standalone config
/// Overridden keys replace every base entry with the same key.
std::vector<GridRow> load_grid(const std::filesystem::path& grid_file);

struct GridRowResult {
    GridRow row;
    int exit_code = kExitOk;
    std::string error;
    std::optional<ExperimentResult> result;
};

struct GridResult {
    std::vector<GridRowResult> rows;
    std::vector<std::string> varied_keys;
    std::vector<std::vector<std::string>> varied_values;  // per row
    std::filesystem::path summary_path;
};

/// Runs every row (a failing row is recorded and the rest still run) and
/// writes a combined summary CSV keyed by the parameters that differ across rows.
GridResult run_grid(const std::filesystem::path& grid_file,
                    const std::optional<std::filesystem::path>& summary_path = std::nullopt);

std::string format_grid_table(const GridResult& grid);

}  // namespace adaptcast
