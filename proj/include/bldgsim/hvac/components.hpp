#pragma once

#include <array>
#include <optional>
#include <vector>

namespace bldgsim::hvac {

inline constexpr double kCpAir = 1006.0;     // J/(kg K)
inline constexpr double kCpWater = 4186.0;   // J/(kg K)
inline constexpr double kKelvin = 273.15;

enum class FanKind { Constant, Staged, Vfd };

/// Fan or pump. Flows in kg/s; power follows the cube law.
struct FanSpec {
    FanKind kind = FanKind::Vfd;
    double rated_flow = 1.0;
    double rated_power = 500.0;
    std::vector<double> stages = {0.0, 0.5, 1.0};   // fractions of rated flow (Staged)
    double turndown = 0.0;                          // minimum running fraction (Vfd)

    void validate() const;
};
using PumpSpec = FanSpec;

struct FlowResult {
    double flow = 0.0;
    double power = 0.0;
};

/// Nearest stage to `fraction`; an exact midpoint rounds down.
double nearest_stage(const std::vector<double>& stages, double fraction);

FlowResult fan_step(const FanSpec& spec, double setpoint);
inline FlowResult pump_step(const PumpSpec& spec, double setpoint) { return fan_step(spec, setpoint); }

struct CoilSpec {
    double effectiveness = 0.8;
    double cp_air = kCpAir;
    double cp_water = kCpWater;

    void validate() const;
};

struct CoilResult {
    double q = 0.0;             // W removed from the air (> 0 when cooling)
    double t_air_out = 0.0;
    double t_water_out = 0.0;
};

CoilResult coil_step(const CoilSpec& spec, double m_air, double t_air_in, double m_water, double t_water_in);

enum class ChillerMode { Carnot, Curve };

struct ChillerSpec {
    ChillerMode mode = ChillerMode::Carnot;
    double eta_carnot = 0.5;
    double cop_ref = 5.0;
    std::array<double, 3> plr_coeffs = {0.2, 1.6, -0.8};   // a0 + a1 PLR + a2 PLR^2, sum 1
    double capacity = 20000.0;                           // W

    void validate() const;
};

struct PlantResult {
    double q_met = 0.0;
    double p_elec = 0.0;
    double cop = 0.0;
};

/// Temperatures in degC.
PlantResult chiller_step(const ChillerSpec& spec, double q_load, double t_evap, double t_cond);
double carnot_cop(double eta, double t_cold_c, double t_hot_c, bool heating);

struct CoolingTowerSpec {
    double effectiveness = 0.7;
    double fan_power = 500.0;

    void validate() const;
};

struct TowerResult {
    double t_cws = 0.0;
    double p_fan = 0.0;
};

TowerResult cooling_tower_step(const CoolingTowerSpec& spec, double m_cw, double t_cwr, double t_wb);

struct BoilerSpec {
    double efficiency = 0.9;

    void validate() const;
};

struct BoilerResult {
    double t_out = 0.0;
    double q_delivered = 0.0;
};

BoilerResult boiler_step(const BoilerSpec& spec, double fuel_power, double m_water, double t_in);

enum class HeatPumpMode { Heating, Cooling };

struct HeatPumpSpec {
    double eta = 0.45;
    double capacity = 10000.0;

    void validate() const;
};

PlantResult heat_pump_step(const HeatPumpSpec& spec, double q_demand, double t_source, double t_supply,
                           HeatPumpMode mode);

struct IceStorageSpec {
    double capacity_kwh = 100.0;
    double efficiency = 0.98;

    void validate() const;
};

struct IceStorageState {
    double energy_kwh = 0.0;
};

struct IceStorageResult {
    IceStorageState next;
    double charge_accepted = 0.0;      // W
    double discharge_delivered = 0.0;  // W
};

/// Powers in W, dt in seconds.
IceStorageResult ice_storage_step(const IceStorageSpec& spec, const IceStorageState& state, double q_charge,
                                  double q_discharge, double dt);

} // namespace bldgsim::hvac
