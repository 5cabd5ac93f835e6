#pragma once

#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"
#include "bldgsim/der/battery.hpp"

namespace bldgsim::der {

/// One stay at home: the car arrives after a trip that used `trip_kwh`.
struct EvStay {
    core::TimePoint arrival;
    core::TimePoint departure;
    double trip_kwh = 0.0;
    double required_soc = 0.0;
};

struct EvParams {
    BatteryParams battery{60.0, 0.1, 1.0, 0.95, 0.95, 7000.0, 7000.0, {{-10.0, 0.8}, {25.0, 1.0}, {45.0, 0.8}},
                          0.0, 0.0, 0.6};
    bool v2g = false;
    std::vector<EvStay> schedule;   // sorted, non-overlapping

    void validate() const;
};

struct EvState {
    BatteryState battery;
    std::size_t next_arrival = 0;   // first stay whose trip has not been charged yet
    bool present = false;
};

enum class EvEventKind { Arrival, TripUnderflow, Departure, DepartureShortfall };

struct EvEvent {
    EvEventKind kind;
    std::size_t stay;
    double soc;
};

struct EvStepResult {
    EvState next;
    double p_actual = 0.0;
    double p_loss = 0.0;
    double cell_kwh = 0.0;
    double trip_kwh = 0.0;       // trip energy charged at an arrival this step
    bool available = false;
    std::vector<EvEvent> events;
};

bool ev_available(const EvParams& p, core::TimePoint now);

EvStepResult ev_step(const EvParams& p, const EvState& s, double p_request, core::TimePoint now, double dt,
                     double t_ambient = 25.0);

/// CSV with columns arrival, departure, trip_kWh, required_soc.
std::vector<EvStay> load_ev_schedule_csv(const std::string& path);

} // namespace bldgsim::der
