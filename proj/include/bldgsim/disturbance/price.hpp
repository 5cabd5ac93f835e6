#pragma once

#include <set>
#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"

namespace bldgsim::disturbance {

struct PriceSchedule {
    enum class Kind { Tou, Series };
    Kind kind = Kind::Tou;
    std::set<int> peak_hours = {16, 17, 18, 19, 20};   // whole hours of day
    double peak = 0.30;                                // $/kWh
    double off_peak = 0.10;
    std::vector<double> series;                        // one value per clock step

    void validate() const;
    bool is_peak(double hour_of_day) const;
};

double tou_price_at(const PriceSchedule& s, const core::SimClock& clock);
/// Price at an arbitrary step and hour (used by forecasts).
double price_at(const PriceSchedule& s, std::int64_t step, double hour_of_day);

/// CSV with columns timestamp, usd_per_kwh.
PriceSchedule load_price_csv(const std::string& path, std::int64_t target_dt);

} // namespace bldgsim::disturbance
