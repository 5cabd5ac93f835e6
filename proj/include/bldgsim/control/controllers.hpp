#pragma once

#include <vector>

namespace bldgsim::control {

enum class ThermalMode { Cooling, Heating };

struct DeadbandConfig {
    double setpoint = 24.0;
    double half_band = 1.0;
    ThermalMode mode = ThermalMode::Cooling;
    double switch_margin = 0.0;   // K, switching thresholds sit this far inside the band

    void validate() const;
};

/// Cooling: on above sp + hb - m, off below sp - hb + m, otherwise hold.
/// Heating mirrored.
bool onoff_deadband(const DeadbandConfig& c, double t_zone, bool prev_on);

enum class TrackMode { Linear, Staged };

/// Linear: clamp to [lo, hi]. Staged: nearest of `stages` (ties round down).
double linear_or_staged_track(TrackMode mode, double reference, double lo, double hi,
                              const std::vector<double>& stages = {});

struct PidConfig {
    double kp = 1.0;
    double ki = 0.0;
    double kd = 0.0;
    double u_min = 0.0;
    double u_max = 1.0;
    double i_min = -1e9;     // integral clamp
    double i_max = 1e9;

    void validate() const;
};

struct PidState {
    double integral = 0.0;
    double prev_error = 0.0;
};

struct PidResult {
    double u = 0.0;
    PidState next;
};

/// Clamping anti-windup: the integral may move toward the value that puts the
/// output on its bound but never beyond it.
PidResult pid_step(const PidConfig& c, const PidState& s, double error, double dt);

struct TouDispatchConfig {
    double charge_target = 0.9;     // off-peak charging stops here
    double reserve_floor = 0.2;     // peak discharging stops here
    double p_max_charge = 5000.0;   // W
    double p_max_discharge = 5000.0;

    void validate() const;
};

/// What the dispatcher needs to know about the battery it commands.
struct StorageView {
    double usable_kwh = 10.0;   // capacity * SOH
    double eta_charge = 0.95;
    double eta_discharge = 0.95;
};

/// Signed bus-side request (W, charge positive). Requests never move SOC
/// past the floor or the target within one step of length dt seconds.
double tou_battery_dispatch(const TouDispatchConfig& c, bool is_peak, double soc, double load_unmet,
                            const StorageView& battery, double dt);

struct PvSplit {
    double to_building = 0.0;
    double to_ev = 0.0;
    double to_battery = 0.0;
    double curtailed = 0.0;   // or exported when export is allowed
};

/// Building first, then EV, then battery; the remainder is curtailed.
PvSplit pv_allocation(double p_pv, double building_load, double ev_headroom, double battery_headroom);

struct PeakCoordination {
    bool curtailed = false;
    std::vector<double> commanded;   // per-building allowed load
    std::vector<double> fractions;   // 1 - commanded / load (0 when not curtailed)
};

/// Proportional curtailment so that the commanded sum does not exceed cap.
PeakCoordination cluster_peak_coordinator(const std::vector<double>& loads, double cap);

} // namespace bldgsim::control
