#include "adaptcast/adaptive_loop.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "adaptcast/errors.hpp"
#include "adaptcast/text.hpp"

namespace adaptcast {

// ---------------------------------------------------------------------------
// Forecasters

MlpForecaster::MlpForecaster(std::span<const std::size_t> architecture, TrainConfig cfg)
    : model_(init_mlp(architecture, cfg)), cfg_(cfg) {}

std::vector<double> MlpForecaster::predict(const ForecastInput& input) {
    auto out = forward(model_, input.x);
    for (double& v : out) v *= input.scale;
    return out;
}

void MlpForecaster::train(const MemoryQueue& memory) {
    if (frozen_) throw std::logic_error("training a frozen forecaster");
    train_increment(model_, memory, cfg_);
}

void MlpForecaster::pretrain(std::span<const WindowedExample> examples, std::span<const double>) {
    if (frozen_) throw std::logic_error("training a frozen forecaster");
    train_epochs(model_, examples, cfg_);
}

ArForecaster::ArForecaster(std::size_t fit_window) : fit_window_(fit_window) {
    if (fit_window_ < 3) throw ConfigError("AR fit window must be at least 3");
}

std::vector<double> ArForecaster::predict(const ForecastInput& input) {
    if (input.history.empty()) throw InsufficientDataError("AR forecast without history");
    if (!frozen_) {
        const std::size_t n = std::min(fit_window_, input.history.size());
        model_ = fit_ar1(input.history.last(n));
        model_->fit_window = fit_window_;
    }
    if (!model_) throw std::logic_error("frozen AR forecaster was never fitted");
    auto out = forecast(*model_, input.history.back(), input.horizon);
    for (double& v : out) v = std::max(v, 0.0);
    return out;
}

void ArForecaster::pretrain(std::span<const WindowedExample>, std::span<const double> history) {
    if (frozen_) throw std::logic_error("training a frozen forecaster");
    const std::size_t n = std::min(fit_window_, history.size());
    model_ = fit_ar1(history.last(n));
    model_->fit_window = fit_window_;
}

// ---------------------------------------------------------------------------
// Loop

namespace {

/// Builds scaled model inputs and training pairs from a validated stream.
/// Everything produced "as of" position s is scaled by the factors at s.
class StreamView {
public:
    StreamView(const TimeSeries& ts, const LoopOptions& options)
        : ts_(ts), options_(options), scale_(Scale::fit(ts.values, options.scale_mode)) {
        if (options_.features) {
            options_.features->validate_against(ts_);
            for (const auto& item : options_.features->items) {
                if (item.column == "cases" || item.column == ts_.value_name) continue;
                if (!column_scales_.count(item.column)) {
                    column_scales_.emplace(item.column, Scale::fit_lenient(ts_.column(item.column), options_.scale_mode));
                }
            }
        }
    }

    const Scale& scale() const { return scale_; }

    /// Input vector for the window ending at position `end`, scaled as of `as_of`.
    std::vector<double> input(std::size_t end, std::size_t as_of) const {
        if (!options_.features) {
            const std::size_t w = options_.window;
            std::vector<double> x(ts_.values.begin() + static_cast<std::ptrdiff_t>(end + 1 - w),
                                  ts_.values.begin() + static_cast<std::ptrdiff_t>(end + 1));
            const double f = scale_.factor_at(as_of);
            for (double& v : x) v /= f;
            return x;
        }
        // Every aggregator is positively homogeneous, so scaling the
        // aggregate equals aggregating the scaled column.
        auto x = aggregate_window(ts_, end, *options_.features);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] /= column_factor(options_.features->items[k].column, as_of);
        return x;
    }

    /// Training pair: window ending at `end`, targets end+1..end+D, scaled as of `as_of`.
    WindowedExample example(std::size_t end, std::size_t as_of) const {
        WindowedExample ex;
        ex.x = input(end, as_of);
        ex.issue_date = ts_.dates[end];
        const double f = scale_.factor_at(as_of);
        for (std::size_t k = 1; k <= options_.horizon; ++k) {
            ex.y.push_back(ts_.values[end + k] / f);
            ex.target_dates.push_back(ts_.dates[end + k]);
        }
        return ex;
    }

    ForecastInput forecast_input(std::size_t position, const std::vector<double>& x) const {
        ForecastInput in;
        in.day = position + 1;
        in.x = x;
        in.history = std::span<const double>(ts_.values).first(position + 1);
        in.scale = scale_.factor_at(position);
        in.horizon = options_.horizon;
        return in;
    }

    ForecastRecord record(std::size_t position, std::vector<double> predicted) const {
        if (predicted.size() != options_.horizon) {
            throw ShapeError("forecaster returned " + std::to_string(predicted.size()) + " values, expected " +
                             std::to_string(options_.horizon));
        }
        for (double v : predicted) {
            if (!std::isfinite(v)) {
                throw NumericError("non-finite forecast issued on " + format_iso(ts_.dates[position]));
            }
        }
        ForecastRecord rec;
        rec.issue_index = position;
        rec.issue_date = ts_.dates[position];
        rec.predicted = std::move(predicted);
        const std::size_t last = ts_.size() - 1;
        for (std::size_t k = 1; k <= options_.horizon; ++k) {
            const std::size_t target = position + k;
            if (target <= last) {
                rec.target_dates.push_back(ts_.dates[target]);
                rec.realized.push_back(ts_.values[target]);
            } else {
                rec.target_dates.push_back(ts_.dates[last] + std::chrono::days{static_cast<int>(target - last)});
            }
        }
        return rec;
    }

private:
    double column_factor(const std::string& column, std::size_t as_of) const {
        if (column == "cases" || column == ts_.value_name) return scale_.factor_at(as_of);
        return column_scales_.at(column).factor_at(as_of);
    }

    const TimeSeries& ts_;
    LoopOptions options_;
    Scale scale_;
    std::map<std::string, Scale> column_scales_;
};

void check_options(const LoopOptions& options) {
    if (options.window == 0 || options.horizon == 0 || options.memory == 0) {
        throw ConfigError("window, horizon and memory must be at least 1");
    }
    if (options.features) options.features->validate();
}

void notify(const LoopOptions& options, const LoopEvent& event) {
    if (options.observer) options.observer(event);
}

}  // namespace

std::vector<ForecastRecord> run_online(const TimeSeries& ts, Forecaster& model, const LoopOptions& options) {
    check_options(options);
    ts.validate();
    const std::size_t lookback = options.lookback();
    const std::size_t horizon = options.horizon;
    if (ts.size() < lookback + horizon) {
        throw InsufficientDataError("stream of length " + std::to_string(ts.size()) +
                                    " is shorter than lookback + horizon = " + std::to_string(lookback + horizon));
    }

    StreamView view(ts, options);
    MemoryQueue memory(options.memory);
    std::vector<ForecastRecord> records;
    records.reserve(ts.size() - lookback + 1);

    // Days are 1-based: day t lives at position t - 1.
    for (std::size_t day = lookback; day <= ts.size(); ++day) {
        const std::size_t pos = day - 1;
        if (day >= lookback + horizon) {
            // x ends on day t - D, y covers days t - D + 1 .. t.
            memory.append(view.example(pos - horizon, pos));
            notify(options, {LoopEvent::Kind::Append, day, memory.size(), &memory.newest(), nullptr});
            model.train(memory);
            notify(options, {LoopEvent::Kind::Train, day, memory.size(), nullptr, nullptr});
        }
        const auto x = view.input(pos, pos);
        records.push_back(view.record(pos, model.predict(view.forecast_input(pos, x))));
        notify(options, {LoopEvent::Kind::Predict, day, memory.size(), nullptr, &records.back()});
    }
    return records;
}

std::vector<ForecastRecord> run_offline(const TimeSeries& ts, Forecaster& model, const LoopOptions& options,
                                        std::size_t pretrain_days) {
    check_options(options);
    ts.validate();
    const std::size_t lookback = options.lookback();
    const std::size_t horizon = options.horizon;
    if (pretrain_days < lookback + horizon) {
        throw ConfigError("pretrain_days (" + std::to_string(pretrain_days) + ") must be at least lookback + horizon (" +
                          std::to_string(lookback + horizon) + ")");
    }
    if (ts.size() < pretrain_days) {
        throw InsufficientDataError("stream of length " + std::to_string(ts.size()) + " is shorter than pretrain_days");
    }

    StreamView view(ts, options);
    const std::size_t as_of = pretrain_days - 1;
    std::vector<WindowedExample> examples;
    for (std::size_t end = lookback - 1; end + horizon <= as_of; ++end) {
        examples.push_back(view.example(end, as_of));
        notify(options, {LoopEvent::Kind::Append, pretrain_days, examples.size(), &examples.back(), nullptr});
    }
    model.pretrain(examples, std::span<const double>(ts.values).first(pretrain_days));
    notify(options, {LoopEvent::Kind::Train, pretrain_days, examples.size(), nullptr, nullptr});
    model.freeze();

    std::vector<ForecastRecord> records;
    for (std::size_t day = pretrain_days; day <= ts.size(); ++day) {
        const std::size_t pos = day - 1;
        const auto x = view.input(pos, pos);
        records.push_back(view.record(pos, model.predict(view.forecast_input(pos, x))));
        notify(options, {LoopEvent::Kind::Predict, day, 0, nullptr, &records.back()});
    }
    return records;
}

void write_predictions_csv(std::ostream& out, std::span<const ForecastRecord> records, std::size_t horizon) {
    out << "issue_date";
    for (std::size_t d = 1; d <= horizon; ++d) out << ",pred_" << d;
    for (std::size_t d = 1; d <= horizon; ++d) out << ",real_" << d;
    out << '\n';
    for (const auto& rec : records) {
        out << format_iso(rec.issue_date);
        for (double v : rec.predicted) out << ',' << text::format_number(v);
        for (std::size_t d = 0; d < horizon; ++d) {
            out << ',';
            if (d < rec.realized.size()) out << text::format_number(rec.realized[d]);
        }
        out << '\n';
    }
}

}  // namespace adaptcast
