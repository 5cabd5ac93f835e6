#include "bldgsim/disturbance/occupancy.hpp"

#include <cmath>
#include <random>

#include "bldgsim/core/error.hpp"
#include "bldgsim/disturbance/profile.hpp"

namespace bldgsim::disturbance {

namespace {

std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_windows(const std::vector<OccupancyWindow>& ws) {
    for (const auto& w : ws) {
        if (!(w.start >= 0.0 && w.end <= 24.0 && w.start < w.end)) {
            throw InvalidArgument("occupancy window must satisfy 0 <= start < end <= 24");
        }
    }
}

} // namespace

double keyed_uniform(std::uint64_t seed, std::int64_t a, std::int64_t b, std::int64_t c) {
    std::uint64_t k = mix(seed);
    k = mix(k ^ static_cast<std::uint64_t>(a));
    k = mix(k ^ static_cast<std::uint64_t>(b));
    k = mix(k ^ static_cast<std::uint64_t>(c));
    std::mt19937_64 rng(k);
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

void SynthOccupancyParams::validate() const {
    check_windows(weekday);
    check_windows(weekend);
    if (!(occupants >= 0.0)) throw InvalidArgument("occupant count must be >= 0");
    for (const auto& a : activities) {
        if (a.name.empty()) throw InvalidArgument("activity needs a name");
        if (!(a.probability >= 0.0 && a.probability <= 1.0)) {
            throw InvalidArgument("activity '" + a.name + "' probability must lie in [0, 1]");
        }
        if (!(a.start_hour >= 0.0 && a.end_hour <= 24.0 && a.start_hour < a.end_hour)) {
            throw InvalidArgument("activity '" + a.name + "' hours must satisfy 0 <= start < end <= 24");
        }
    }
}

OccupancyRecord synth_occupancy(const SynthOccupancyParams& p, core::TimePoint when) {
    const double h = core::SimClock::hour_of_day(when);
    const auto day = std::chrono::floor<std::chrono::days>(when).time_since_epoch().count();
    const auto& windows = core::SimClock::is_weekday(when) ? p.weekday : p.weekend;

    OccupancyRecord r;
    int window = -1;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (h >= windows[i].start && h < windows[i].end) window = static_cast<int>(i);
    }
    r.occupied = window >= 0;
    r.occupants = r.occupied ? p.occupants : 0.0;
    r.offset_k = r.occupied ? p.comfort_offset : 0.0;
    for (std::size_t k = 0; k < p.activities.size(); ++k) {
        const auto& a = p.activities[k];
        bool on = false;
        if (h >= a.start_hour && h < a.end_hour) {
            if (a.scheduled_appliance) {
                on = keyed_uniform(p.seed, day, -1, static_cast<std::int64_t>(k)) < a.probability;
            } else if (r.occupied) {
                on = keyed_uniform(p.seed, day, window, static_cast<std::int64_t>(k)) < a.probability;
            }
        }
        r.activity[a.name] = on;
    }
    return r;
}

OccupancyRecord synth_occupancy(const SynthOccupancyParams& p, const core::SimClock& clock) {
    return synth_occupancy(p, clock.now());
}

OccupancySeries load_occupancy_csv(const std::string& path, std::int64_t target_dt) {
    const auto prof = load_profile_csv(path, {"occupied", "offset_k"}, {"occupants"}, target_dt, true);
    OccupancySeries s;
    s.start = prof.start;
    s.dt_seconds = prof.dt_seconds;
    const auto& occ = prof.column("occupied");
    const auto& off = prof.column("offset_k");
    const std::vector<double>* count = prof.columns.count("occupants") ? &prof.column("occupants") : nullptr;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        OccupancyRecord r;
        if (occ[i] != 0.0 && occ[i] != 1.0) throw ParseError(path + ": 'occupied' must be 0 or 1");
        r.occupied = occ[i] == 1.0;
        r.offset_k = off[i];
        r.occupants = count ? (*count)[i] : (r.occupied ? 1.0 : 0.0);
        for (const auto& [name, col] : prof.columns) {
            if (name == "occupied" || name == "offset_k" || name == "occupants") continue;
            if (col[i] != 0.0 && col[i] != 1.0) throw ParseError(path + ": activity '" + name + "' must be 0 or 1");
            r.activity[name] = col[i] == 1.0;
        }
        s.records.push_back(std::move(r));
    }
    return s;
}

} // namespace bldgsim::disturbance
