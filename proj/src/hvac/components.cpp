#include "bldgsim/hvac/components.hpp"

#include <algorithm>
#include <cmath>

#include "bldgsim/core/error.hpp"

namespace bldgsim::hvac {

void FanSpec::validate() const {
    if (!(rated_flow > 0.0)) throw InvalidArgument("fan/pump rated flow must be > 0");
    if (!(rated_power >= 0.0)) throw InvalidArgument("fan/pump rated power must be >= 0");
    if (kind == FanKind::Staged) {
        if (stages.empty()) throw InvalidArgument("staged fan needs stages");
        if (!std::is_sorted(stages.begin(), stages.end())) throw InvalidArgument("fan stages must be sorted");
        if (stages.front() != 0.0) throw InvalidArgument("fan stages must include 0");
        if (stages.back() > 1.0 || stages.front() < 0.0) throw InvalidArgument("fan stages must lie in [0, 1]");
    }
    if (kind == FanKind::Vfd && !(turndown >= 0.0 && turndown < 1.0)) {
        throw InvalidArgument("VFD turndown must lie in [0, 1)");
    }
}

double nearest_stage(const std::vector<double>& stages, double fraction) {
    double best = stages.front();
    for (double s : stages) {
        if (std::abs(s - fraction) < std::abs(best - fraction)) best = s;
    }
    return best;
}

FlowResult fan_step(const FanSpec& spec, double setpoint) {
    if (!(setpoint >= 0.0)) throw InvalidArgument("fan/pump setpoint must be >= 0");
    double v = 0.0;
    switch (spec.kind) {
    case FanKind::Constant: v = setpoint > 0.0 ? spec.rated_flow : 0.0; break;
    case FanKind::Staged: v = nearest_stage(spec.stages, setpoint / spec.rated_flow) * spec.rated_flow; break;
    case FanKind::Vfd:
        v = setpoint > 0.0 ? std::clamp(setpoint, spec.turndown * spec.rated_flow, spec.rated_flow) : 0.0;
        break;
    }
    const double r = v / spec.rated_flow;
    return {v, spec.rated_power * r * r * r};
}

void CoilSpec::validate() const {
    if (!(effectiveness > 0.0 && effectiveness <= 1.0)) throw InvalidArgument("coil effectiveness must lie in (0, 1]");
    if (!(cp_air > 0.0 && cp_water > 0.0)) throw InvalidArgument("coil heat capacities must be > 0");
}

CoilResult coil_step(const CoilSpec& spec, double m_air, double t_air_in, double m_water, double t_water_in) {
    if (!(m_air >= 0.0) || !(m_water >= 0.0)) throw InvalidArgument("coil flows must be >= 0");
    if (m_air == 0.0 || m_water == 0.0) return {0.0, t_air_in, t_water_in};
    const double ca = m_air * spec.cp_air;
    const double cw = m_water * spec.cp_water;
    const double q = spec.effectiveness * std::min(ca, cw) * (t_air_in - t_water_in);
    return {q, t_air_in - q / ca, t_water_in + q / cw};
}

void ChillerSpec::validate() const {
    if (!(capacity > 0.0)) throw InvalidArgument("chiller capacity must be > 0");
    if (mode == ChillerMode::Carnot) {
        if (!(eta_carnot > 0.0 && eta_carnot <= 1.0)) throw InvalidArgument("Carnot efficiency must lie in (0, 1]");
    } else {
        if (!(cop_ref > 0.0)) throw InvalidArgument("reference COP must be > 0");
        const double s = plr_coeffs[0] + plr_coeffs[1] + plr_coeffs[2];
        if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument("PLR curve coefficients must sum to 1");
    }
}

double carnot_cop(double eta, double t_cold_c, double t_hot_c, bool heating) {
    const double tc = t_cold_c + kKelvin;
    const double th = t_hot_c + kKelvin;
    if (!(th > tc)) throw InvalidArgument("Carnot COP needs the hot side warmer than the cold side");
    return eta * (heating ? th : tc) / (th - tc);
}

PlantResult chiller_step(const ChillerSpec& spec, double q_load, double t_evap, double t_cond) {
    if (!(q_load >= 0.0)) throw InvalidArgument("chiller load must be >= 0");
    PlantResult r;
    r.q_met = std::min(q_load, spec.capacity);
    if (spec.mode == ChillerMode::Carnot) {
        r.cop = carnot_cop(spec.eta_carnot, t_evap, t_cond, false);
    } else {
        const double plr = r.q_met / spec.capacity;
        const auto& a = spec.plr_coeffs;
        r.cop = spec.cop_ref * (a[0] + a[1] * plr + a[2] * plr * plr);
        if (!(r.cop > 0.0)) throw InvalidArgument("chiller curve gives a non-positive COP");
    }
    r.p_elec = r.q_met / r.cop;
    return r;
}

void CoolingTowerSpec::validate() const {
    if (!(effectiveness > 0.0 && effectiveness <= 1.0)) throw InvalidArgument("tower effectiveness must lie in (0, 1]");
    if (!(fan_power >= 0.0)) throw InvalidArgument("tower fan power must be >= 0");
}

TowerResult cooling_tower_step(const CoolingTowerSpec& spec, double m_cw, double t_cwr, double t_wb) {
    if (!(m_cw >= 0.0)) throw InvalidArgument("condenser water flow must be >= 0");
    if (m_cw == 0.0) return {t_cwr, 0.0};
    if (t_cwr < t_wb) return {t_cwr, spec.fan_power};
    return {t_cwr - spec.effectiveness * (t_cwr - t_wb), spec.fan_power};
}

void BoilerSpec::validate() const {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("boiler efficiency must lie in (0, 1]");
}

BoilerResult boiler_step(const BoilerSpec& spec, double fuel_power, double m_water, double t_in) {
    if (!(fuel_power >= 0.0) || !(m_water >= 0.0)) throw InvalidArgument("boiler inputs must be >= 0");
    if (m_water == 0.0) return {t_in, 0.0};
    const double q = spec.efficiency * fuel_power;
    return {t_in + q / (m_water * kCpWater), q};
}

void HeatPumpSpec::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("heat pump efficiency must lie in (0, 1]");
    if (!(capacity > 0.0)) throw InvalidArgument("heat pump capacity must be > 0");
}

PlantResult heat_pump_step(const HeatPumpSpec& spec, double q_demand, double t_source, double t_supply,
                           HeatPumpMode mode) {
    if (!(q_demand >= 0.0)) throw InvalidArgument("heat pump demand must be >= 0");
    PlantResult r;
    if (mode == HeatPumpMode::Heating) {
        r.cop = carnot_cop(spec.eta, t_source, t_supply, true);
    } else {
        r.cop = carnot_cop(spec.eta, t_supply, t_source, false);
    }
    r.q_met = std::min(q_demand, spec.capacity);
    r.p_elec = r.q_met / r.cop;
    return r;
}

void IceStorageSpec::validate() const {
    if (!(capacity_kwh > 0.0)) throw InvalidArgument("ice storage capacity must be > 0");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("ice storage efficiency must lie in (0, 1]");
}

IceStorageResult ice_storage_step(const IceStorageSpec& spec, const IceStorageState& state, double q_charge,
                                  double q_discharge, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("ice storage dt must be > 0");
    if (!(q_charge >= 0.0) || !(q_discharge >= 0.0)) throw InvalidArgument("ice storage powers must be >= 0");
    if (q_charge > 0.0 && q_discharge > 0.0) throw InvalidArgument("ice storage cannot charge and discharge at once");
    const double h = dt / 3600.0;
    const double eta = spec.efficiency;
    IceStorageResult r;
    double e = state.energy_kwh;
    if (q_charge > 0.0) {
        const double room_w = (spec.capacity_kwh - e) * 1000.0 / (eta * h);
        r.charge_accepted = std::min(q_charge, std::max(0.0, room_w));
        e += eta * r.charge_accepted * h / 1000.0;
    } else if (q_discharge > 0.0) {
        const double avail_w = e * 1000.0 * eta / h;
        r.discharge_delivered = std::min(q_discharge, std::max(0.0, avail_w));
        e -= r.discharge_delivered * h / 1000.0 / eta;
    }
    r.next.energy_kwh = std::clamp(e, 0.0, spec.capacity_kwh);
    return r;
}

} // namespace bldgsim::hvac
