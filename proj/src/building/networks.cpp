#include "bldgsim/building/networks.hpp"

#include <algorithm>
#include <cmath>

#include "bldgsim/core/error.hpp"
#include "bldgsim/hvac/components.hpp"

namespace bldgsim::building {

void ElectricalNetworkSpec::validate() const {
    if (!(base_load >= 0.0)) throw InvalidArgument("base load must be >= 0");
    if (!(lighting_power >= 0.0)) throw InvalidArgument("lighting power must be >= 0");
    for (const auto& [name, w] : appliances) {
        if (!(w >= 0.0)) throw InvalidArgument("appliance '" + name + "' rating must be >= 0");
        if (name == lighting) throw InvalidArgument("lighting is configured separately from appliances");
    }
}

ElectricalBreakdown electrical_breakdown(const ElectricalNetworkSpec& spec, const std::map<std::string, bool>& flags,
                                         bool occupied) {
    ElectricalBreakdown b;
    b.base = spec.base_load;
    bool light = occupied;
    for (const auto& [name, on] : flags) {
        if (name == spec.lighting) {
            light = occupied && on;
            continue;
        }
        auto it = spec.appliances.find(name);
        if (it == spec.appliances.end()) throw InvalidArgument("unknown appliance '" + name + "'");
        const double w = on ? it->second : 0.0;
        b.per_appliance[name] = w;
        b.plug += w;
    }
    b.lighting = light ? spec.lighting_power : 0.0;
    return b;
}

double electrical_demand(const ElectricalNetworkSpec& spec, const std::map<std::string, bool>& flags, bool occupied) {
    return electrical_breakdown(spec, flags, occupied).total();
}

double dhw_demand(const std::map<std::string, bool>& flags, const std::map<std::string, double>& draws) {
    double total = 0.0;
    for (const auto& [name, rate] : draws) {
        if (!(rate >= 0.0)) throw InvalidArgument("draw '" + name + "' must be >= 0");
        auto it = flags.find(name);
        if (it != flags.end() && it->second) total += rate;
    }
    return total;
}

void WaterTankSpec::validate() const {
    if (!(mass > 0.0)) throw InvalidArgument("tank mass must be > 0");
    if (!(ua >= 0.0)) throw InvalidArgument("tank UA must be >= 0");
    if (!(heater >= 0.0)) throw InvalidArgument("tank heater rating must be >= 0");
    if (!(t_inlet < t_max)) throw InvalidArgument("tank inlet temperature must be below the maximum");
}

WaterTankResult water_tank_step(const WaterTankSpec& spec, const WaterTankState& state, bool heater_on, double draw,
                                double dt) {
    return water_tank_step(spec, state, heater_on ? 1.0 : 0.0, draw, dt);
}

WaterTankResult water_tank_step(const WaterTankSpec& spec, const WaterTankState& state, double heater_fraction,
                                double draw, double dt) {
    if (!(heater_fraction >= 0.0 && heater_fraction <= 1.0)) {
        throw InvalidArgument("tank heater fraction must lie in [0, 1]");
    }
    if (!(dt > 0.0)) throw InvalidArgument("tank dt must be > 0");
    if (!(draw >= 0.0)) throw InvalidArgument("tank draw must be >= 0");
    const double mc = spec.mass * hvac::kCpWater;
    const double stiffness = (spec.ua + draw * hvac::kCpWater) * dt / mc;
    if (!(stiffness < 0.5)) {
        throw InvalidArgument("tank step unstable: (UA + draw cp) dt / (m cp) = " + std::to_string(stiffness) +
                              " >= 0.5");
    }
    const double t = state.t_tank;
    const double q_heat = heater_fraction * spec.heater;
    const double q = q_heat - draw * hvac::kCpWater * (t - spec.t_inlet) - spec.ua * (t - spec.t_ambient);
    WaterTankResult r;
    r.next.t_tank = std::clamp(t + dt * q / mc, spec.t_inlet, spec.t_max);
    r.p_heater = q_heat;
    return r;
}

void BuildingSpec::validate() const {
    rc.validate();
    electrical.validate();
    for (const auto& [name, rate] : draws) {
        if (!(rate >= 0.0)) throw InvalidArgument("draw '" + name + "' must be >= 0");
    }
    if (tank) tank->validate();
}

BuildingOutputs building_step(const BuildingSpec& spec, const BuildingState& state, const BuildingInputs& in) {
    BuildingOutputs out;
    const auto& occ = in.occupancy;
    std::map<std::string, bool> appliance_flags;
    for (const auto& [name, on] : occ.activity) {
        if (spec.electrical.appliances.count(name) || name == spec.electrical.lighting) appliance_flags[name] = on;
    }
    out.loads = electrical_breakdown(spec.electrical, appliance_flags, occ.occupied);

    std::vector<std::string> names;
    std::vector<double> act;
    for (const auto& [name, on] : occ.activity) {
        names.push_back(name);
        act.push_back(on ? 1.0 : 0.0);
    }
    if (spec.model) {
        thermal::Exogenous x{in.t_out, in.ghi, occ.occupants, {}};
        for (const auto& n : spec.model->activity_names()) {
            auto it = occ.activity.find(n);
            x.activity.push_back(it != occ.activity.end() && it->second ? 1.0 : 0.0);
        }
        out.next.t_zone = spec.model->step(state.t_zone, x, in.q_hvac);
    } else {
        const double q_int = spec.rc.internal_gain(occ.occupants, names, act);
        out.next.t_zone = thermal::rc_ground_truth_step(spec.rc, state.t_zone, in.t_out, q_int,
                                                        spec.rc.solar_gain(in.ghi), in.q_hvac, in.dt);
    }

    out.next.tank = state.tank;
    if (spec.tank) {
        out.dhw_draw = dhw_demand(occ.activity, spec.draws);
        const auto t = water_tank_step(*spec.tank, state.tank, in.heater_on, out.dhw_draw, in.dt);
        out.next.tank = t.next;
        out.p_heater = t.p_heater;
    }
    out.p_hvac = in.p_hvac;
    out.p_total = out.p_hvac + out.loads.total() + out.p_heater;
    return out;
}

} // namespace bldgsim::building
