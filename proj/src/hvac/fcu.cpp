#include "bldgsim/hvac/fcu.hpp"

#include <cmath>

#include "bldgsim/core/error.hpp"

namespace bldgsim::hvac {

void FcuAssembly::validate() const {
    fan.validate();
    pump.validate();
    coil.validate();
    chiller.validate();
    if (tower) tower->validate();
    if (max_iterations < 1) throw InvalidArgument("FCU bisection needs at least one iteration");
    if (!(tolerance > 0.0)) throw InvalidArgument("FCU tolerance must be > 0");
}

namespace {

double condenser_temperature(const FcuAssembly& a, double t_wb, double& p_tower, bool running) {
    p_tower = 0.0;
    if (!a.tower) return a.t_cond;
    const auto r = cooling_tower_step(*a.tower, running ? 1.0 : 0.0, a.t_cwr, t_wb);
    p_tower = r.p_fan;
    return r.t_cws;
}

} // namespace

HvacOutput fcu_compose(const FcuAssembly& a, double v_sa_setpoint, double m_water_setpoint, double t_zone,
                       double t_wb) {
    HvacOutput out;
    const auto fan = fan_step(a.fan, v_sa_setpoint);
    out.v_sa = fan.flow;
    out.p_fan = fan.power;
    const auto pump = pump_step(a.pump, fan.flow > 0.0 ? m_water_setpoint : 0.0);
    out.m_water = pump.flow;
    out.p_pump = pump.power;
    const auto coil = coil_step(a.coil, out.v_sa, t_zone, out.m_water, a.t_chw_supply);
    out.q_coil = coil.q;
    out.t_sa = coil.t_air_out;
    out.q_zone = out.v_sa * a.coil.cp_air * (out.t_sa - t_zone);

    const double load = std::max(0.0, coil.q);
    const double t_cond = condenser_temperature(a, t_wb, out.p_tower, load > 0.0);
    const auto ch = chiller_step(a.chiller, load, a.t_chw_supply, t_cond);
    out.p_chiller = ch.p_elec;
    out.cop = ch.cop;
    out.p_total = out.p_fan + out.p_pump + out.p_chiller + out.p_tower;
    return out;
}

HvacOutput fcu_system_step(const FcuAssembly& a, const FcuAction& action, double t_zone, double t_wb) {
    if (!(action.v_sa_setpoint >= 0.0)) throw InvalidArgument("V_SA setpoint must be >= 0");
    const double v_sa = fan_step(a.fan, action.v_sa_setpoint).flow;
    if (v_sa == 0.0 || action.t_sa_setpoint >= t_zone) return fcu_compose(a, action.v_sa_setpoint, 0.0, t_zone, t_wb);

    auto leaving = [&](double m) { return coil_step(a.coil, v_sa, t_zone, m, a.t_chw_supply); };
    const double m_max = a.pump.rated_flow;
    double m = m_max;
    int it = 0;
    if (leaving(m_max).t_air_out <= action.t_sa_setpoint + a.tolerance) {
        double lo = 0.0, hi = m_max;
        while (it < a.max_iterations) {
            ++it;
            m = 0.5 * (lo + hi);
            const double t = leaving(m).t_air_out;
            if (std::abs(t - action.t_sa_setpoint) <= a.tolerance) break;
            if (t > action.t_sa_setpoint) lo = m;
            else hi = m;
        }
    }
    // Keep the coil load within the chiller capacity.
    if (leaving(m).q > a.chiller.capacity) {
        double lo = 0.0, hi = m;
        for (int k = 0; k < 60; ++k) {
            const double mid = 0.5 * (lo + hi);
            if (leaving(mid).q > a.chiller.capacity) hi = mid;
            else lo = mid;
        }
        m = lo;
    }
    auto out = fcu_compose(a, action.v_sa_setpoint, m, t_zone, t_wb);
    out.iterations = it;
    return out;
}

} // namespace bldgsim::hvac
