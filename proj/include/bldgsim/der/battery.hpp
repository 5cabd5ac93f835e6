#pragma once

#include <utility>
#include <vector>

namespace bldgsim::der {

/// Stationary battery parameters. Bus-side power is positive while charging.
struct BatteryParams {
    double capacity_kwh = 10.0;
    double soc_min = 0.1;
    double soc_max = 0.95;
    double eta_charge = 0.95;
    double eta_discharge = 0.95;
    double p_max_charge = 5000.0;      // W
    double p_max_discharge = 5000.0;   // W
    /// (ambient degC, power-limit multiplier), piecewise linear, held flat outside.
    std::vector<std::pair<double, double>> derate = {{-10.0, 0.8}, {25.0, 1.0}, {45.0, 0.8}};
    double k_cycle = 1e-4;             // SOH loss per capacity of cell throughput
    double k_calendar = 0.0;           // SOH loss per hour
    double soh_min = 0.6;

    void validate() const;
    double derate_factor(double t_ambient) const;
};

struct BatteryState {
    double soc = 0.5;
    double soh = 1.0;
};

struct BatteryStepResult {
    BatteryState next;
    double p_actual = 0.0;     // bus side, W
    double p_loss = 0.0;       // W
    double cell_kwh = 0.0;     // signed energy into the cells
};

/// Bus-side power the battery can accept (>= 0) or deliver (<= 0) this step.
double battery_charge_limit(const BatteryParams& p, const BatteryState& s, double t_ambient, double dt);
double battery_discharge_limit(const BatteryParams& p, const BatteryState& s, double t_ambient, double dt);

/// Clamps the request by power limits, temperature derate and SOC headroom,
/// then integrates SOC. dt in seconds.
BatteryStepResult battery_step(const BatteryParams& p, const BatteryState& s, double p_request, double t_ambient,
                               double dt);

/// SOH' = SOH - k_cycle * throughput / capacity - k_calendar * dt_h, floored at soh_min.
double battery_degradation_step(const BatteryParams& p, double soh, double throughput_kwh, double dt);

} // namespace bldgsim::der
