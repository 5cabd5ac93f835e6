#include "bldgsim/thermal/rc_zone.hpp"

#include "bldgsim/core/error.hpp"

namespace bldgsim::thermal {

void RcZoneSpec::validate() const {
    if (!(capacitance > 0.0)) throw InvalidArgument("RC zone capacitance must be > 0");
    if (!(resistance > 0.0)) throw InvalidArgument("RC zone resistance must be > 0");
    if (!(solar_aperture >= 0.0)) throw InvalidArgument("RC zone solar aperture must be >= 0");
    if (!(gain_per_occupant >= 0.0)) throw InvalidArgument("RC zone occupant gain must be >= 0");
    for (const auto& [name, w] : activity_gains) {
        if (!(w >= 0.0)) throw InvalidArgument("RC zone activity gain '" + name + "' must be >= 0");
    }
}

double RcZoneSpec::internal_gain(double occupancy, std::span<const std::string> names,
                                 std::span<const double> activity) const {
    double q = gain_per_occupant * occupancy;
    for (std::size_t i = 0; i < names.size() && i < activity.size(); ++i) {
        auto it = activity_gains.find(names[i]);
        if (it != activity_gains.end()) q += it->second * activity[i];
    }
    return q;
}

double rc_ground_truth_step(const RcZoneSpec& spec, double t_zone, double t_out, double q_internal,
                            double q_solar, double q_hvac, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("rc_ground_truth_step: dt must be > 0");
    return t_zone +
           (dt / spec.capacitance) * ((t_out - t_zone) / spec.resistance + q_internal + q_solar + q_hvac);
}

} // namespace bldgsim::thermal
