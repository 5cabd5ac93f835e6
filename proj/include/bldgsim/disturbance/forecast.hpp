#pragma once

#include <span>
#include <vector>

namespace bldgsim::disturbance {

/// History in, H-step series out. A learned forecaster can replace the
/// seasonal-naive one behind this interface.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::vector<double> forecast(std::span<const double> history, std::size_t horizon) const = 0;
};

/// forecast(t + k) = history(t + k - period); the forecast continues the
/// last full period when H exceeds it.
class SeasonalNaive final : public Forecaster {
public:
    explicit SeasonalNaive(std::size_t period_steps);
    std::vector<double> forecast(std::span<const double> history, std::size_t horizon) const override;
    std::size_t period() const noexcept { return period_; }

private:
    std::size_t period_;
};

std::vector<double> seasonal_naive_forecast(std::span<const double> history, std::size_t steps_per_day,
                                            std::size_t horizon);

} // namespace bldgsim::disturbance
