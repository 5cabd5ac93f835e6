#include "bldgsim/disturbance/price.hpp"

#include <cmath>

#include "bldgsim/core/error.hpp"
#include "bldgsim/disturbance/profile.hpp"

namespace bldgsim::disturbance {

void PriceSchedule::validate() const {
    if (kind == Kind::Tou) {
        if (!(peak >= 0.0) || !(off_peak >= 0.0)) throw InvalidArgument("prices must be >= 0");
        for (int h : peak_hours) {
            if (h < 0 || h > 23) throw InvalidArgument("peak hours must lie in 0..23");
        }
    } else {
        if (series.empty()) throw InvalidArgument("price series is empty");
        for (double p : series) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("prices must be finite and >= 0");
        }
    }
}

bool PriceSchedule::is_peak(double hour_of_day) const {
    return peak_hours.count(static_cast<int>(std::floor(hour_of_day))) > 0;
}

double price_at(const PriceSchedule& s, std::int64_t step, double hour_of_day) {
    if (s.kind == PriceSchedule::Kind::Series) {
        if (step < 0 || static_cast<std::size_t>(step) >= s.series.size()) {
            throw RuntimeError("price series has no value for step " + std::to_string(step));
        }
        return s.series[static_cast<std::size_t>(step)];
    }
    return s.is_peak(hour_of_day) ? s.peak : s.off_peak;
}

double tou_price_at(const PriceSchedule& s, const core::SimClock& clock) {
    return price_at(s, clock.step(), clock.hour_of_day());
}

PriceSchedule load_price_csv(const std::string& path, std::int64_t target_dt) {
    const auto p = load_profile_csv(path, {"usd_per_kwh"}, {}, target_dt);
    PriceSchedule s;
    s.kind = PriceSchedule::Kind::Series;
    s.series = p.column("usd_per_kwh");
    try {
        s.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(path + ": " + e.what());
    }
    return s;
}

} // namespace bldgsim::disturbance
