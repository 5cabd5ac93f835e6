#include "bldgsim/control/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bldgsim/core/environment.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/hvac/components.hpp"

namespace bldgsim::control {

void DeadbandConfig::validate() const {
    if (!(half_band > 0.0)) throw InvalidArgument("deadband half-band must be > 0");
    if (!std::isfinite(setpoint)) throw InvalidArgument("deadband setpoint must be finite");
    if (!(switch_margin >= 0.0 && switch_margin < half_band)) {
        throw InvalidArgument("deadband switch margin must lie in [0, half_band)");
    }
}

bool onoff_deadband(const DeadbandConfig& c, double t, bool prev_on) {
    const double hi = c.setpoint + c.half_band - c.switch_margin;
    const double lo = c.setpoint - c.half_band + c.switch_margin;
    if (c.mode == ThermalMode::Cooling) {
        if (t > hi) return true;
        if (t < lo) return false;
    } else {
        if (t < lo) return true;
        if (t > hi) return false;
    }
    return prev_on;
}

double linear_or_staged_track(TrackMode mode, double reference, double lo, double hi,
                              const std::vector<double>& stages) {
    if (!(reference >= 0.0)) throw InvalidArgument("tracking reference must be >= 0");
    if (mode == TrackMode::Linear) {
        if (!(lo <= hi)) throw InvalidArgument("tracking limits must be ordered");
        return std::clamp(reference, lo, hi);
    }
    if (stages.empty()) throw InvalidArgument("staged tracking needs stages");
    return hvac::nearest_stage(stages, reference);
}

void PidConfig::validate() const {
    if (!(u_min <= u_max)) throw InvalidArgument("PID output bounds must be ordered");
    if (!(i_min <= i_max)) throw InvalidArgument("PID integral bounds must be ordered");
}

PidResult pid_step(const PidConfig& c, const PidState& s, double error, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("PID dt must be > 0");
    const double deriv = (error - s.prev_error) / dt;
    const double candidate = std::clamp(s.integral + error * dt, c.i_min, c.i_max);
    const double p = c.kp * error + c.kd * deriv;
    double integral = candidate;
    if (c.ki > 0.0) {
        const double i_hi = (c.u_max - p) / c.ki;
        const double i_lo = (c.u_min - p) / c.ki;
        if (candidate > i_hi) integral = std::max(i_hi, std::min(s.integral, candidate));
        else if (candidate < i_lo) integral = std::min(i_lo, std::max(s.integral, candidate));
        integral = std::clamp(integral, c.i_min, c.i_max);
    }
    PidResult r;
    r.next.prev_error = error;
    r.next.integral = integral;
    r.u = std::clamp(p + c.ki * integral, c.u_min, c.u_max);
    return r;
}

void TouDispatchConfig::validate() const {
    if (!(reserve_floor >= 0.0 && reserve_floor < charge_target && charge_target <= 1.0)) {
        throw InvalidArgument("TOU targets must satisfy 0 <= floor < target <= 1");
    }
    if (!(p_max_charge >= 0.0 && p_max_discharge >= 0.0)) throw InvalidArgument("TOU power limits must be >= 0");
}

double tou_battery_dispatch(const TouDispatchConfig& c, bool is_peak, double soc, double load_unmet,
                            const StorageView& b, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dispatch dt must be > 0");
    const double h = dt / 3600.0;
    if (is_peak) {
        if (soc <= c.reserve_floor || load_unmet <= 0.0) return 0.0;
        const double to_floor = (soc - c.reserve_floor) * b.usable_kwh * 1000.0 * b.eta_discharge / h;
        return -std::min({c.p_max_discharge, load_unmet, to_floor});
    }
    if (soc >= c.charge_target) return 0.0;
    const double to_target = (c.charge_target - soc) * b.usable_kwh * 1000.0 / (b.eta_charge * h);
    return std::min(c.p_max_charge, to_target);
}

PvSplit pv_allocation(double p_pv, double load, double ev_headroom, double battery_headroom) {
    if (!(p_pv >= 0.0 && load >= 0.0 && ev_headroom >= 0.0 && battery_headroom >= 0.0)) {
        throw InvalidArgument("PV allocation inputs must be >= 0");
    }
    PvSplit s;
    double rest = p_pv;
    s.to_building = std::min(rest, load);
    rest -= s.to_building;
    s.to_ev = std::min(rest, ev_headroom);
    rest -= s.to_ev;
    s.to_battery = std::min(rest, battery_headroom);
    rest -= s.to_battery;
    s.curtailed = rest;
    return s;
}

PeakCoordination cluster_peak_coordinator(const std::vector<double>& loads, double cap) {
    if (!(cap > 0.0)) throw InvalidArgument("peak cap must be > 0");
    PeakCoordination r;
    const double total = std::accumulate(loads.begin(), loads.end(), 0.0);
    r.commanded = loads;
    r.fractions.assign(loads.size(), 0.0);
    if (total <= cap) return r;
    r.curtailed = true;
    r.commanded = core::disaggregate(cap, loads);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        r.fractions[i] = loads[i] > 0.0 ? 1.0 - r.commanded[i] / loads[i] : 0.0;
    }
    return r;
}

} // namespace bldgsim::control
