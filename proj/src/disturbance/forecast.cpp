#include "bldgsim/disturbance/forecast.hpp"

#include "bldgsim/core/error.hpp"

namespace bldgsim::disturbance {

SeasonalNaive::SeasonalNaive(std::size_t period_steps) : period_(period_steps) {
    if (period_ == 0) throw InvalidArgument("seasonal period must be >= 1 step");
}

std::vector<double> SeasonalNaive::forecast(std::span<const double> history, std::size_t horizon) const {
    if (history.size() < period_) {
        throw InvalidArgument("seasonal-naive forecast needs at least one period (" + std::to_string(period_) +
                              " steps) of history, got " + std::to_string(history.size()));
    }
    std::vector<double> out(horizon);
    const std::size_t base = history.size() - period_;
    for (std::size_t k = 0; k < horizon; ++k) out[k] = history[base + k % period_];
    return out;
}

std::vector<double> seasonal_naive_forecast(std::span<const double> history, std::size_t steps_per_day,
                                            std::size_t horizon) {
    return SeasonalNaive(steps_per_day).forecast(history, horizon);
}

} // namespace bldgsim::disturbance
