#pragma once

#include <optional>

#include "bldgsim/hvac/components.hpp"

namespace bldgsim::hvac {

/// Fan coil unit on a single chilled-water coil and chiller. Zone air is
/// recirculated through the coil.
struct FcuAssembly {
    FanSpec fan;
    PumpSpec pump{FanKind::Vfd, 0.25, 200.0, {0.0, 0.5, 1.0}, 0.0};
    CoilSpec coil;
    ChillerSpec chiller;
    double t_chw_supply = 7.0;    // degC
    double t_cond = 35.0;         // degC, condenser side when no tower is configured
    std::optional<CoolingTowerSpec> tower;
    double t_cwr = 35.0;          // condenser water return into the tower
    int max_iterations = 20;
    double tolerance = 0.05;      // K on supply air temperature

    void validate() const;
};

struct FcuAction {
    double t_sa_setpoint = 13.0;
    double v_sa_setpoint = 0.0;
};

struct HvacOutput {
    double t_sa = 0.0;
    double v_sa = 0.0;
    double q_zone = 0.0;        // W into the zone, negative when cooling
    double p_total = 0.0;
    double p_fan = 0.0;
    double p_pump = 0.0;
    double p_chiller = 0.0;
    double p_tower = 0.0;
    double m_water = 0.0;
    double q_coil = 0.0;        // W removed from the air
    double cop = 0.0;
    int iterations = 0;         // bisection steps spent on the water flow
};

/// Composition for a given water flow setpoint, without the T_SA loop.
/// `t_wb` feeds the optional cooling tower.
HvacOutput fcu_compose(const FcuAssembly& a, double v_sa_setpoint, double m_water_setpoint, double t_zone,
                       double t_wb = 20.0);

/// Fan, then a bounded bisection on chilled-water flow so the coil leaving
/// air approaches the T_SA setpoint. Infeasible setpoints saturate the pump
/// and the realized T_SA is reported.
HvacOutput fcu_system_step(const FcuAssembly& a, const FcuAction& action, double t_zone, double t_wb = 20.0);

} // namespace bldgsim::hvac
