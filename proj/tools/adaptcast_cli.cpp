// adaptcast: experiment runner for adaptive case forecasting.
//
//   adaptcast run <config>
//   adaptcast grid <gridfile> [--summary path]
//   adaptcast synth --out path [--preset paper] [--wave s,p,e,h ...] [...]
//   adaptcast report <run-dir>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptcast/config.hpp"
#include "adaptcast/errors.hpp"
#include "adaptcast/evaluation.hpp"
#include "adaptcast/experiment.hpp"
#include "adaptcast/time_series.hpp"

namespace fs = std::filesystem;
using namespace adaptcast;

namespace {

int cmd_run(const std::string& config_path) {
    const auto cfg = load_config(config_path);
    for (const auto& w : config_warnings(cfg)) std::cerr << "warning: " << w << '\n';
    const auto result = run_experiment(cfg);
    std::cout << format_table(result.report);
    std::cout << "artifacts: " << result.directory.string() << '\n';
    return kExitOk;
}

int cmd_grid(const std::string& grid_path, const std::optional<std::string>& summary) {
    const auto grid = run_grid(grid_path, summary ? std::optional<fs::path>(*summary) : std::nullopt);
    int worst = kExitOk;
    for (const auto& row : grid.rows) {
        if (!row.error.empty()) std::cerr << "row '" << row.row.label << "' failed: " << row.error << '\n';
        if (row.exit_code != kExitOk && worst == kExitOk) worst = row.exit_code;
        if (row.result) {
            for (const auto& w : row.result->warnings) std::cerr << "warning [" << row.row.label << "]: " << w << '\n';
        }
    }
    std::cout << format_grid_table(grid);
    std::cout << "summary: " << grid.summary_path.string() << '\n';
    return worst;
}

struct SynthOptions {
    std::string out;
    std::string preset;
    std::vector<std::string> waves;
    int length = -1;
    double noise = 0.05;
    double baseline = -1.0;
    std::uint64_t seed = 0;
    std::string start_date;
};

int cmd_synth(const SynthOptions& opt) {
    SyntheticConfig cfg;
    if (opt.preset == "paper" || (opt.preset.empty() && opt.waves.empty())) {
        cfg = paper_like_synthetic_config(opt.noise, opt.seed);
    } else if (!opt.preset.empty()) {
        throw ConfigError("unknown preset '" + opt.preset + "'");
    }
    cfg.noise = opt.noise;
    cfg.seed = opt.seed;
    if (!opt.waves.empty()) {
        cfg.waves.clear();
        for (const auto& w : opt.waves) cfg.waves.push_back(parse_wave_spec(w));
    }
    if (opt.length > 0) cfg.length = opt.length;
    if (opt.baseline > 0.0) cfg.baseline = opt.baseline;
    if (!opt.start_date.empty()) cfg.start_date = parse_date_or_throw(opt.start_date, DateFormat::Iso, "--start-date");
    const auto ts = generate_synthetic_stream(cfg);
    write_csv(fs::path(opt.out), ts);
    std::cout << "wrote " << ts.size() << " days to " << opt.out << '\n';
    return kExitOk;
}

int cmd_report(const std::string& run_dir) {
    const fs::path dir(run_dir);
    if (fs::exists(dir / "FAILED")) {
        std::ifstream failed(dir / "FAILED");
        std::string reason;
        std::getline(failed, reason);
        std::cerr << "run failed: " << reason << '\n';
        return kExitData;
    }
    std::ifstream in(dir / "metrics.csv");
    if (!in) throw IoError("no metrics.csv in '" + run_dir + "'");
    const auto report = read_metrics_csv(in);
    for (const auto& [k, v] : report.metadata) std::cout << k << ": " << v << '\n';
    std::cout << '\n' << format_table(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive forecasting experiments: incremental MLP and AR(1) on daily case streams"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one experiment configuration");
    run->add_option("config", config_path, "Configuration file")->required();

    std::string grid_path;
    std::optional<std::string> summary_path;
    auto* grid = app.add_subcommand("grid", "Run every configuration listed in a grid file");
    grid->add_option("gridfile", grid_path, "Grid file")->required();
    grid->add_option("--summary", summary_path, "Summary CSV path");

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Write a synthetic multi-wave case stream as CSV");
    synth->add_option("--out,-o", synth_opt.out, "Output CSV path")->required();
    synth->add_option("--preset", synth_opt.preset, "Named wave layout (paper)");
    synth->add_option("--wave", synth_opt.waves, "Wave as start,peak,end,height (repeatable)");
    synth->add_option("--length", synth_opt.length, "Number of days");
    synth->add_option("--noise", synth_opt.noise, "Multiplicative noise std-dev fraction")->capture_default_str();
    synth->add_option("--baseline", synth_opt.baseline, "Between-wave level");
    synth->add_option("--seed", synth_opt.seed, "Random seed")->capture_default_str();
    synth->add_option("--start-date", synth_opt.start_date, "First date (YYYY-MM-DD)");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Print the metrics table of a finished run");
    report->add_option("run-dir", report_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path);
        if (*grid) return cmd_grid(grid_path, summary_path);
        if (*synth) return cmd_synth(synth_opt);
        if (*report) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        const int code = exit_code_for(std::current_exception());
        std::cerr << "error: " << e.what() << '\n';
        return code;
    }
    return kExitFailure;
}
