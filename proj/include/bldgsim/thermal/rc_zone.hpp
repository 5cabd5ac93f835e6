#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bldgsim::thermal {

/// Single-capacitance zone: C dT/dt = (T_out - T)/R + Q_int + Q_solar + Q_hvac.
struct RcZoneSpec {
    double capacitance = 1e7;       // J/K
    double resistance = 0.002;      // K/W
    double solar_aperture = 1.0;    // m2-equivalent, Q_solar = aperture * GHI
    double gain_per_occupant = 100; // W
    std::map<std::string, double> activity_gains;   // W while the flag is set

    void validate() const;
    double solar_gain(double ghi) const { return solar_aperture * ghi; }
    /// `activity` follows the order of `names`; unknown names contribute nothing.
    double internal_gain(double occupancy, std::span<const std::string> names,
                         std::span<const double> activity) const;
};

/// Explicit Euler step of the RC zone.
double rc_ground_truth_step(const RcZoneSpec& spec, double t_zone, double t_out, double q_internal,
                            double q_solar, double q_hvac, double dt);

} // namespace bldgsim::thermal
