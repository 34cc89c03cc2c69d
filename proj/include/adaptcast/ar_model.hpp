#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adaptcast {

/// AR(1) with intercept: n[t] = intercept + coefficient * n[t-1].
/// This is ARIMA(1, 0, 0).
struct ArModel {
    double intercept = 0.0;
    double coefficient = 0.0;
    std::size_t fit_window = 30;
};

/// Ordinary least squares of history[i] on history[i-1] over the whole span.
/// A zero-variance predictor falls back to coefficient 0 and the mean of the
/// targets. Needs at least three values.
ArModel fit_ar1(std::span<const double> history);

/// Recursive multi-step forecast starting from `last_value`.
std::vector<double> forecast(const ArModel& model, double last_value, std::size_t horizon);

}  // namespace adaptcast
