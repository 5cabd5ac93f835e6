#include <algorithm>
#include <cmath>

#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/der/battery.hpp"
#include "bldgsim/der/ev.hpp"
#include "bldgsim/der/pv.hpp"

namespace bldgsim::der {

// --- PV --------------------------------------------------------------------

void PvSpec::validate() const {
    if (!(rated_power >= 0.0)) throw InvalidArgument("PV rated power must be >= 0");
    if (!(soiling > 0.0 && soiling <= 1.0)) throw InvalidArgument("PV soiling factor must lie in (0, 1]");
    if (!(shading >= 0.0 && shading <= 1.0)) throw InvalidArgument("PV shading factor must lie in [0, 1]");
    if (!(inverter_eff > 0.0 && inverter_eff <= 1.0)) throw InvalidArgument("inverter efficiency must lie in (0, 1]");
    if (!(degradation >= 0.0 && degradation < 1.0)) throw InvalidArgument("PV degradation must lie in [0, 1)");
    if (!std::isfinite(gamma) || !std::isfinite(k_t)) throw InvalidArgument("PV coefficients must be finite");
}

double pv_cell_temperature(const PvSpec& spec, double ghi, double t_ambient) { return t_ambient + spec.k_t * ghi; }

double pv_power(const PvSpec& spec, double ghi, double t_ambient, double years) {
    if (!(ghi >= 0.0)) throw InvalidArgument("irradiance must be >= 0");
    const double t_cell = pv_cell_temperature(spec, ghi, t_ambient);
    const double p = spec.rated_power * (ghi / 1000.0) * (1.0 + spec.gamma * (t_cell - 25.0)) * spec.soiling *
                     spec.shading * spec.inverter_eff * std::pow(1.0 - spec.degradation, years);
    return std::max(0.0, p);
}

// --- battery ---------------------------------------------------------------

void BatteryParams::validate() const {
    if (!(capacity_kwh > 0.0)) throw InvalidArgument("battery capacity must be > 0");
    if (!(soc_min >= 0.0 && soc_min < soc_max && soc_max <= 1.0)) {
        throw InvalidArgument("battery SOC bounds must satisfy 0 <= min < max <= 1");
    }
    if (!(eta_charge > 0.0 && eta_charge <= 1.0 && eta_discharge > 0.0 && eta_discharge <= 1.0)) {
        throw InvalidArgument("battery efficiencies must lie in (0, 1]");
    }
    if (!(p_max_charge >= 0.0 && p_max_discharge >= 0.0)) throw InvalidArgument("battery power limits must be >= 0");
    if (derate.empty()) throw InvalidArgument("battery derate curve is empty");
    for (std::size_t i = 0; i < derate.size(); ++i) {
        if (!(derate[i].second >= 0.0 && derate[i].second <= 1.0)) {
            throw InvalidArgument("derate multipliers must lie in [0, 1]");
        }
        if (i > 0 && !(derate[i].first > derate[i - 1].first)) {
            throw InvalidArgument("derate temperatures must increase");
        }
    }
    if (!(k_cycle >= 0.0 && k_calendar >= 0.0)) throw InvalidArgument("degradation rates must be >= 0");
    if (!(soh_min > 0.0 && soh_min <= 1.0)) throw InvalidArgument("SOH floor must lie in (0, 1]");
}

double BatteryParams::derate_factor(double t) const {
    if (t <= derate.front().first) return derate.front().second;
    if (t >= derate.back().first) return derate.back().second;
    for (std::size_t i = 1; i < derate.size(); ++i) {
        if (t <= derate[i].first) {
            const auto [t0, m0] = derate[i - 1];
            const auto [t1, m1] = derate[i];
            return m0 + (m1 - m0) * (t - t0) / (t1 - t0);
        }
    }
    return derate.back().second;
}

double battery_charge_limit(const BatteryParams& p, const BatteryState& s, double t_ambient, double dt) {
    const double h = dt / 3600.0;
    const double room_kwh = std::max(0.0, (p.soc_max - s.soc) * p.capacity_kwh * s.soh);
    return std::min(p.p_max_charge * p.derate_factor(t_ambient), room_kwh * 1000.0 / (p.eta_charge * h));
}

double battery_discharge_limit(const BatteryParams& p, const BatteryState& s, double t_ambient, double dt) {
    const double h = dt / 3600.0;
    const double avail_kwh = std::max(0.0, (s.soc - p.soc_min) * p.capacity_kwh * s.soh);
    return -std::min(p.p_max_discharge * p.derate_factor(t_ambient), avail_kwh * 1000.0 * p.eta_discharge / h);
}

BatteryStepResult battery_step(const BatteryParams& p, const BatteryState& s, double p_request, double t_ambient,
                               double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("battery dt must be > 0");
    if (!std::isfinite(p_request)) throw InvalidArgument("battery request must be finite");
    const double h = dt / 3600.0;
    const double usable = p.capacity_kwh * s.soh;
    BatteryStepResult r;
    r.next = s;
    if (p_request > 0.0) {
        r.p_actual = std::min(p_request, battery_charge_limit(p, s, t_ambient, dt));
        r.cell_kwh = p.eta_charge * r.p_actual * h / 1000.0;
    } else if (p_request < 0.0) {
        r.p_actual = std::max(p_request, battery_discharge_limit(p, s, t_ambient, dt));
        r.cell_kwh = r.p_actual * h / 1000.0 / p.eta_discharge;
    }
    r.p_loss = std::abs(r.p_actual * h / 1000.0 - r.cell_kwh) * 1000.0 / h;
    r.next.soc = std::clamp(s.soc + r.cell_kwh / usable, p.soc_min, p.soc_max);
    if (s.soc < p.soc_min || s.soc > p.soc_max) r.next.soc = s.soc + r.cell_kwh / usable;
    return r;
}

double battery_degradation_step(const BatteryParams& p, double soh, double throughput_kwh, double dt) {
    if (!(throughput_kwh >= 0.0)) throw InvalidArgument("battery throughput must be >= 0");
    if (soh <= p.soh_min) return soh;
    const double next = soh - p.k_cycle * throughput_kwh / p.capacity_kwh - p.k_calendar * dt / 3600.0;
    return std::max(next, p.soh_min);
}

// --- EV --------------------------------------------------------------------

void EvParams::validate() const {
    battery.validate();
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& s = schedule[i];
        if (!(s.arrival < s.departure)) throw InvalidArgument("EV stay must arrive before it departs");
        if (!(s.trip_kwh >= 0.0)) throw InvalidArgument("EV trip energy must be >= 0");
        if (!(s.required_soc >= 0.0 && s.required_soc <= 1.0)) {
            throw InvalidArgument("EV required SOC must lie in [0, 1]");
        }
        if (i > 0 && schedule[i - 1].departure > s.arrival) throw InvalidArgument("EV stays overlap");
    }
}

bool ev_available(const EvParams& p, core::TimePoint now) {
    for (const auto& s : p.schedule) {
        if (now >= s.arrival && now < s.departure) return true;
    }
    return false;
}

EvStepResult ev_step(const EvParams& p, const EvState& s, double p_request, core::TimePoint now, double dt,
                     double t_ambient) {
    if (!(dt > 0.0)) throw InvalidArgument("EV dt must be > 0");
    EvStepResult r;
    r.next = s;
    const double usable = p.battery.capacity_kwh * s.battery.soh;
    while (r.next.next_arrival < p.schedule.size() && now >= p.schedule[r.next.next_arrival].arrival) {
        const std::size_t i = r.next.next_arrival++;
        const double want = p.schedule[i].trip_kwh / usable;
        double soc = r.next.battery.soc - want;
        if (soc < p.battery.soc_min) {
            soc = p.battery.soc_min;
            r.events.push_back({EvEventKind::TripUnderflow, i, soc});
        }
        r.trip_kwh += (r.next.battery.soc - soc) * usable;
        r.next.battery.soc = soc;
        r.events.push_back({EvEventKind::Arrival, i, soc});
    }
    r.available = ev_available(p, now);
    if (s.present && !r.available) {
        const std::size_t i = r.next.next_arrival == 0 ? 0 : r.next.next_arrival - 1;
        const double soc = r.next.battery.soc;
        r.events.push_back({EvEventKind::Departure, i, soc});
        if (i < p.schedule.size() && soc + 1e-12 < p.schedule[i].required_soc) {
            r.events.push_back({EvEventKind::DepartureShortfall, i, soc});
        }
    }
    r.next.present = r.available;
    if (!r.available) return r;

    double request = p_request;
    if (request < 0.0 && !p.v2g) request = 0.0;
    const auto b = battery_step(p.battery, r.next.battery, request, t_ambient, dt);
    r.next.battery = b.next;
    r.p_actual = b.p_actual;
    r.p_loss = b.p_loss;
    r.cell_kwh = b.cell_kwh;
    return r;
}

std::vector<EvStay> load_ev_schedule_csv(const std::string& path) {
    const auto t = core::read_csv_file(path);
    const auto ca = t.require_column("arrival");
    const auto cd = t.require_column("departure");
    const auto ce = t.require_column("trip_kWh");
    const auto cr = t.require_column("required_soc");
    if (t.header.size() != 4) throw ParseError(path + ": expected columns arrival,departure,trip_kWh,required_soc");
    std::vector<EvStay> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        EvStay s;
        try {
            s.arrival = core::parse_timestamp(t.rows[r][ca]);
            s.departure = core::parse_timestamp(t.rows[r][cd]);
        } catch (const Error& e) {
            throw ParseError(path + ":" + std::to_string(t.line_numbers[r]) + ": " + e.what());
        }
        s.trip_kwh = t.number(r, ce);
        s.required_soc = t.number(r, cr);
        out.push_back(s);
    }
    EvParams check;
    check.schedule = out;
    try {
        check.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(path + ": " + e.what());
    }
    return out;
}

} // namespace bldgsim::der
