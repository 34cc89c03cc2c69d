#include "adaptcast/ar_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adaptcast/errors.hpp"

namespace adaptcast {

ArModel fit_ar1(std::span<const double> history) {
    if (history.size() < 3) {
        throw InsufficientDataError("AR(1) fit needs at least 3 values, got " + std::to_string(history.size()));
    }
    double magnitude = 0.0;
    for (double v : history) {
        if (!std::isfinite(v)) throw NumericError("AR(1) fit on non-finite data");
        magnitude = std::max(magnitude, std::fabs(v));
    }

    const auto lagged = history.first(history.size() - 1);
    const auto target = history.subspan(1);
    const double n = static_cast<double>(lagged.size());

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < lagged.size(); ++i) {
        mean_x += lagged[i];
        mean_y += target[i];
    }
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lagged.size(); ++i) {
        const double dx = lagged[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (target[i] - mean_y);
    }

    ArModel model;
    model.fit_window = history.size();
    // Rounding in the means leaves ~1e-16 relative noise in an otherwise
    // constant predictor; anything at that level counts as zero variance.
    const double tiny = 1e-10 * magnitude;
    if (sxx <= n * tiny * tiny) {
        model.coefficient = 0.0;
        model.intercept = mean_y;
        return model;
    }
    model.coefficient = sxy / sxx;
    model.intercept = mean_y - model.coefficient * mean_x;
    return model;
}

std::vector<double> forecast(const ArModel& model, double last_value, std::size_t horizon) {
    std::vector<double> out;
    out.reserve(horizon);
    double prev = last_value;
    for (std::size_t k = 0; k < horizon; ++k) {
        prev = model.intercept + model.coefficient * prev;
        out.push_back(prev);
    }
    return out;
}

}  // namespace adaptcast
