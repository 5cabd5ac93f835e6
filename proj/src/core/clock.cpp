#include "bldgsim/core/clock.hpp"

#include <cstdio>

#include "bldgsim/core/error.hpp"

namespace bldgsim::core {

using namespace std::chrono;

TimePoint parse_timestamp(std::string_view text) {
    std::string s(text);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = ' ';
    int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &sec);
    if (n < 6 || (sep != ' ' && sep != 'T')) {
        throw ParseError("bad timestamp '" + s + "' (expected YYYY-MM-DD HH:MM)");
    }
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 24 || mi < 0 || mi > 59 || sec < 0 || sec > 59) {
        throw ParseError("invalid calendar timestamp '" + s + "'");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

std::string format_timestamp(TimePoint tp) {
    auto day_point = floor<days>(tp);
    year_month_day ymd{day_point};
    hh_mm_ss hms{tp - day_point};
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()));
    return buf;
}

SimClock::SimClock(TimePoint start, std::int64_t dt_seconds) : start_(start), dt_(dt_seconds) {
    if (dt_seconds <= 0) throw InvalidArgument("clock dt must be > 0");
}

TimePoint SimClock::at(std::int64_t step) const noexcept {
    return start_ + seconds{step * dt_};
}

double SimClock::hour_of_day(TimePoint tp) noexcept {
    auto since_midnight = tp - floor<days>(tp);
    return static_cast<double>(since_midnight.count()) / 3600.0;
}

std::int64_t SimClock::day_index() const noexcept {
    return (floor<days>(now()) - floor<days>(start_)).count();
}

bool SimClock::is_weekday(TimePoint tp) noexcept {
    weekday wd{floor<days>(tp)};
    return wd != Saturday && wd != Sunday;
}

} // namespace bldgsim::core
