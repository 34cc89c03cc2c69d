#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaptcast/evaluation.hpp"
#include "adaptcast/features.hpp"
#include "adaptcast/mlp.hpp"
#include "adaptcast/time_series.hpp"

namespace adaptcast {

struct ConfigEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// `key = value` lines; `#` starts a comment; blank lines are skipped.
std::vector<ConfigEntry> parse_key_values(std::istream& in);

enum class LoopMode { Online, Offline };
enum class ModelKind { Mlp, Ar };
enum class DataSource { Csv, Synthetic };

std::string_view to_string(LoopMode mode);
std::string_view to_string(ModelKind kind);
std::string_view to_string(DataSource source);

struct ExperimentConfig {
    std::string name = "experiment";

    DataSource source = DataSource::Synthetic;
    std::filesystem::path csv_path;
    CsvSchema schema;
    SyntheticConfig synthetic = paper_like_synthetic_config();
    double low_count_threshold = 100.0;

    std::size_t window = 7;
    std::size_t horizon = 1;
    std::size_t memory = 1;
    bool memory_explicit = false;
    LoopMode mode = LoopMode::Online;
    ModelKind model = ModelKind::Mlp;
    std::optional<FeatureSpec> features;
    std::vector<std::size_t> hidden{64};
    TrainConfig train;
    std::size_t repetitions = 10;
    std::uint64_t seed = 0;
    std::size_t pretrain_days = 30;
    std::size_t ar_fit_window = 30;
    ScaleMode normalization = ScaleMode::RunningMax;
    SegmentSpec segments = SegmentSpec::paper_default();
    std::filesystem::path output_dir = "runs";

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Every effective setting as ordered key/value pairs; repeated keys
    /// (feature, synthetic.wave, segment) appear once per item. Excludes
    /// output_dir. Parsing these entries back reproduces the config.
    std::vector<std::pair<std::string, std::string>> canonical_entries() const;
    std::string canonical_text() const;
    /// FNV-1a of canonical_text().
    std::uint64_t hash() const;
    std::string hash_hex() const;
};

/// Relative paths inside the config resolve against `base_dir`.
ExperimentConfig config_from_entries(const std::vector<ConfigEntry>& entries, const std::filesystem::path& base_dir);
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parses "start,peak,end,height".
WaveSpec parse_wave_spec(std::string_view text);

}  // namespace adaptcast
