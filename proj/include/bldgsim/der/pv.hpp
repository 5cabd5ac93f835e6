#pragma once

namespace bldgsim::der {

struct PvSpec {
    double rated_power = 5000.0;   // W at 1000 W/m2, 25 degC cell
    double gamma = -0.004;         // 1/K
    double soiling = 1.0;          // (0, 1]
    double shading = 1.0;          // [0, 1]
    double inverter_eff = 0.96;    // (0, 1]
    double degradation = 0.005;    // per year, [0, 1)
    double k_t = 0.025;            // K m2/W, cell temperature rise per irradiance

    void validate() const;
};

double pv_cell_temperature(const PvSpec& spec, double ghi, double t_ambient);

/// AC output in W, clamped at >= 0.
double pv_power(const PvSpec& spec, double ghi, double t_ambient, double years_in_service = 0.0);

} // namespace bldgsim::der
