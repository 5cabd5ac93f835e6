#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"

namespace bldgsim::disturbance {

struct OccupancyRecord {
    bool occupied = false;
    double occupants = 0.0;
    double offset_k = 0.0;                 // comfort setpoint offset
    std::map<std::string, bool> activity;
};

struct OccupancyWindow {
    double start = 0.0;   // hours of day, [start, end)
    double end = 24.0;
};

struct ActivitySpec {
    std::string name;
    double probability = 0.0;      // drawn once per occupied window
    double start_hour = 0.0;       // the flag is only set inside [start_hour, end_hour)
    double end_hour = 24.0;
    bool scheduled_appliance = false;   // may run while nobody is home
};

struct SynthOccupancyParams {
    std::uint64_t seed = 1;
    std::vector<OccupancyWindow> weekday = {{0.0, 8.0}, {17.0, 24.0}};
    std::vector<OccupancyWindow> weekend = {{0.0, 24.0}};
    double occupants = 2.0;
    double comfort_offset = 0.0;
    std::vector<ActivitySpec> activities;

    void validate() const;
};

/// Pure function of (seed, calendar day, window, activity): repeated calls and
/// replays after reset give identical records.
OccupancyRecord synth_occupancy(const SynthOccupancyParams& p, core::TimePoint when);
OccupancyRecord synth_occupancy(const SynthOccupancyParams& p, const core::SimClock& clock);

/// Uniform [0, 1) draw keyed by the given integers.
double keyed_uniform(std::uint64_t seed, std::int64_t a, std::int64_t b, std::int64_t c);

struct OccupancySeries {
    core::TimePoint start{};
    std::int64_t dt_seconds = 0;
    std::vector<OccupancyRecord> records;
};

/// CSV: timestamp, occupied, offset_k[, occupants], then one 0/1 column per activity.
OccupancySeries load_occupancy_csv(const std::string& path, std::int64_t target_dt);

} // namespace bldgsim::disturbance
