#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "bldgsim/disturbance/occupancy.hpp"
#include "bldgsim/thermal/rc_zone.hpp"
#include "bldgsim/thermal/zone_model.hpp"

namespace bldgsim::building {

struct ElectricalNetworkSpec {
    double base_load = 100.0;                        // W, always on
    std::map<std::string, double> appliances;        // name -> rated W, switched by activity flags
    std::string lighting = "lighting";               // appliance gated by mobility
    double lighting_power = 150.0;                   // W while occupied

    void validate() const;
};

struct ElectricalBreakdown {
    double base = 0.0;
    double plug = 0.0;       // sum of switched appliances
    double lighting = 0.0;
    std::map<std::string, double> per_appliance;

    double total() const { return base + plug + lighting; }
};

/// Flags name appliances of `spec` (unknown names are errors). Lighting is
/// on while occupied unless a flag for it says otherwise.
ElectricalBreakdown electrical_breakdown(const ElectricalNetworkSpec& spec, const std::map<std::string, bool>& flags,
                                         bool occupied);
double electrical_demand(const ElectricalNetworkSpec& spec, const std::map<std::string, bool>& flags, bool occupied);

/// Sum of the draws (kg/s) of active flags; flags without a draw are ignored.
double dhw_demand(const std::map<std::string, bool>& flags, const std::map<std::string, double>& draws);

struct WaterTankSpec {
    double mass = 200.0;         // kg
    double ua = 2.0;             // W/K
    double heater = 4500.0;      // W
    double t_inlet = 10.0;       // degC
    double t_ambient = 20.0;     // degC
    double t_max = 95.0;

    void validate() const;
};

struct WaterTankState {
    double t_tank = 55.0;
};

struct WaterTankResult {
    WaterTankState next;
    double p_heater = 0.0;
};

/// Explicit Euler; throws InvalidArgument when (UA + draw cp) dt / (m cp) >= 0.5.
WaterTankResult water_tank_step(const WaterTankSpec& spec, const WaterTankState& state, bool heater_on, double draw,
                                double dt);
/// Modulated heater: `heater_fraction` in [0, 1] of the rating.
WaterTankResult water_tank_step(const WaterTankSpec& spec, const WaterTankState& state, double heater_fraction,
                                double draw, double dt);

/// One building: a zone (RC or learned), the electrical network and an optional tank.
struct BuildingSpec {
    thermal::RcZoneSpec rc;
    std::shared_ptr<const thermal::ZoneModel> model;   // used instead of rc when set
    ElectricalNetworkSpec electrical;
    std::map<std::string, double> draws;
    std::optional<WaterTankSpec> tank;

    void validate() const;
};

struct BuildingState {
    double t_zone = 24.0;
    WaterTankState tank;
};

struct BuildingInputs {
    double t_out = 20.0;
    double ghi = 0.0;
    disturbance::OccupancyRecord occupancy;
    double q_hvac = 0.0;      // W delivered to the zone
    double p_hvac = 0.0;      // W electrical
    bool heater_on = false;
    double dt = 900.0;
};

struct BuildingOutputs {
    BuildingState next;
    ElectricalBreakdown loads;
    double p_hvac = 0.0;
    double p_heater = 0.0;
    double dhw_draw = 0.0;
    double p_total = 0.0;    // hvac + base + plug + lighting + heater
};

BuildingOutputs building_step(const BuildingSpec& spec, const BuildingState& state, const BuildingInputs& in);

} // namespace bldgsim::building
