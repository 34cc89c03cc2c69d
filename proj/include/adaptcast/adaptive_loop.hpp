#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adaptcast/ar_model.hpp"
#include "adaptcast/features.hpp"
#include "adaptcast/memory_queue.hpp"
#include "adaptcast/mlp.hpp"
#include "adaptcast/time_series.hpp"

namespace adaptcast {

/// A D-day forecast issued at one stream position, in persons/day.
struct ForecastRecord {
    std::size_t issue_index = 0;  // 0-based stream position
    Date issue_date;
    std::vector<double> predicted;
    std::vector<Date> target_dates;
    /// Ground truth for the targets that lie inside the stream; shorter than
    /// `predicted` near the end of the stream.
    std::vector<double> realized;

    bool fully_realized() const noexcept { return realized.size() == predicted.size(); }
};

/// What a forecaster may look at when predicting at day t.
struct ForecastInput {
    std::size_t day = 0;                 // 1-based stream day t
    std::span<const double> x;           // scaled lag window or feature vector at t
    std::span<const double> history;     // raw case values for days 1..t
    double scale = 1.0;                  // case scale factor in force at t
    std::size_t horizon = 1;
};

/// Model plugged into the prequential loop. predict() returns persons/day.
class Forecaster {
public:
    virtual ~Forecaster() = default;

    virtual std::vector<double> predict(const ForecastInput& input) = 0;
    /// Incremental update on the full replay memory.
    virtual void train(const MemoryQueue& memory) = 0;
    /// Offline fit on a chronological example list. `history` holds the raw
    /// case values of the pretraining period.
    virtual void pretrain(std::span<const WindowedExample> examples, std::span<const double> history) = 0;
    /// After freeze() no further training may change the model.
    virtual void freeze() = 0;
    virtual std::string name() const = 0;
};

class MlpForecaster final : public Forecaster {
public:
    MlpForecaster(std::span<const std::size_t> architecture, TrainConfig cfg);

    std::vector<double> predict(const ForecastInput& input) override;
    void train(const MemoryQueue& memory) override;
    void pretrain(std::span<const WindowedExample> examples, std::span<const double> history) override;
    void freeze() override { frozen_ = true; }
    std::string name() const override { return "mlp"; }

    const MlpModel& model() const noexcept { return model_; }

private:
    MlpModel model_;
    TrainConfig cfg_;
    bool frozen_ = false;
};

/// Refits AR(1) on the trailing fit_window raw values at every prediction
/// unless frozen. Memory is ignored. Forecasts are clipped at zero.
class ArForecaster final : public Forecaster {
public:
    explicit ArForecaster(std::size_t fit_window = 30);

    std::vector<double> predict(const ForecastInput& input) override;
    void train(const MemoryQueue&) override {}
    void pretrain(std::span<const WindowedExample> examples, std::span<const double> history) override;
    void freeze() override { frozen_ = true; }
    std::string name() const override { return "ar"; }

    const std::optional<ArModel>& last_fit() const noexcept { return model_; }

private:
    std::size_t fit_window_;
    std::optional<ArModel> model_;
    bool frozen_ = false;
};

struct LoopEvent {
    enum class Kind { Predict, Append, Train };
    Kind kind;
    std::size_t day;  // 1-based stream day
    std::size_t memory_size = 0;
    const WindowedExample* example = nullptr;  // Append only
    const ForecastRecord* record = nullptr;    // Predict only
};

using LoopObserver = std::function<void(const LoopEvent&)>;

struct LoopOptions {
    std::size_t window = 7;
    std::size_t horizon = 1;
    std::size_t memory = 1;
    ScaleMode scale_mode = ScaleMode::RunningMax;
    /// When set, x is the feature vector over features->window days and
    /// `window` is ignored.
    std::optional<FeatureSpec> features;
    LoopObserver observer;

    std::size_t lookback() const noexcept { return features ? features->window : window; }
};

/// Prequential predict-then-train run. Wait `lookback` days, predict only on
/// days W..W+D-1, then from day W+D append (x[t-D], y[t]) to the memory,
/// train, and predict. Emits size - W + 1 records.
std::vector<ForecastRecord> run_online(const TimeSeries& ts, Forecaster& model, const LoopOptions& options);

/// Trains on every example inside the first `pretrain_days`, freezes, then
/// forecasts from day `pretrain_days` to the end of the stream.
std::vector<ForecastRecord> run_offline(const TimeSeries& ts, Forecaster& model, const LoopOptions& options,
                                        std::size_t pretrain_days = 30);

/// One row per record: issue_date, D predictions, D realized values (empty
/// where beyond the stream). Numbers have 10 significant digits.
void write_predictions_csv(std::ostream& out, std::span<const ForecastRecord> records, std::size_t horizon);

}  // namespace adaptcast
