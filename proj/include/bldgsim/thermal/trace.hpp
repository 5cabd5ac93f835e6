#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bldgsim::thermal {

/// Aligned zone series at a fixed step. Q_hvac is negative when cooling.
struct ThermalTrace {
    double dt = 900.0;
    std::vector<double> t_zone;
    std::vector<double> t_out;
    std::vector<double> ghi;
    std::vector<double> occupancy;
    std::vector<double> q_hvac;
    std::vector<std::string> activity_names;
    std::vector<std::vector<double>> activity;   // activity[k][step]

    std::size_t size() const noexcept { return t_zone.size(); }
    /// Equal lengths, temperatures within [-50, 60] degC, dt > 0.
    void validate() const;
    ThermalTrace slice(std::size_t begin, std::size_t end) const;
    std::vector<double> activity_at(std::size_t step) const;
};

// Columns: t_zone_c,t_out_c,ghi_wm2,occupancy,q_hvac_w[,act_<name>...]
ThermalTrace read_trace_csv(const std::string& path, double dt);
void write_trace_csv(std::ostream& out, const ThermalTrace& trace);

} // namespace bldgsim::thermal
