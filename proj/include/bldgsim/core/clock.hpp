#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace bldgsim::core {

using TimePoint = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD HH:MM" or "YYYY-MM-DD HH:MM:SS" (also with a 'T').
TimePoint parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint tp);

/// Fixed-step simulation clock: wall time = start + t * dt.
class SimClock {
public:
    SimClock() = default;
    SimClock(TimePoint start, std::int64_t dt_seconds);

    std::int64_t dt_seconds() const noexcept { return dt_; }
    double dt_hours() const noexcept { return static_cast<double>(dt_) / 3600.0; }
    std::int64_t step() const noexcept { return t_; }
    TimePoint start() const noexcept { return start_; }

    TimePoint now() const noexcept { return at(t_); }
    TimePoint at(std::int64_t step) const noexcept;

    /// Hour of day in [0, 24) at the current step, fractional.
    double hour_of_day() const noexcept { return hour_of_day(now()); }
    static double hour_of_day(TimePoint tp) noexcept;
    /// Whole days since the start of the run.
    std::int64_t day_index() const noexcept;
    bool is_weekday() const noexcept { return is_weekday(now()); }
    static bool is_weekday(TimePoint tp) noexcept;
    std::int64_t steps_per_day() const noexcept { return 86400 / dt_; }

    void advance() noexcept { ++t_; }
    void reset() noexcept { t_ = 0; }

private:
    TimePoint start_{};
    std::int64_t dt_ = 900;
    std::int64_t t_ = 0;
};

} // namespace bldgsim::core
