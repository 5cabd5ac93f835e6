#include "bldgsim/thermal/trace.hpp"

#include <ostream>

#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"

namespace bldgsim::thermal {

void ThermalTrace::validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("trace dt must be > 0");
    const std::size_t n = t_zone.size();
    if (t_out.size() != n || ghi.size() != n || occupancy.size() != n || q_hvac.size() != n ||
        activity.size() != activity_names.size()) {
        throw InvalidArgument("trace series have unequal lengths");
    }
    for (const auto& a : activity) {
        if (a.size() != n) throw InvalidArgument("trace activity series length mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (double t : {t_zone[i], t_out[i]}) {
            if (!(t >= -50.0 && t <= 60.0)) {
                throw InvalidArgument("trace temperature out of [-50, 60] degC at step " + std::to_string(i));
            }
        }
    }
}

ThermalTrace ThermalTrace::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw InvalidArgument("trace slice out of range");
    auto cut = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                                   v.begin() + static_cast<std::ptrdiff_t>(end));
    };
    ThermalTrace out;
    out.dt = dt;
    out.t_zone = cut(t_zone);
    out.t_out = cut(t_out);
    out.ghi = cut(ghi);
    out.occupancy = cut(occupancy);
    out.q_hvac = cut(q_hvac);
    out.activity_names = activity_names;
    for (const auto& a : activity) out.activity.push_back(cut(a));
    return out;
}

std::vector<double> ThermalTrace::activity_at(std::size_t step) const {
    std::vector<double> a;
    a.reserve(activity.size());
    for (const auto& series : activity) a.push_back(series[step]);
    return a;
}

ThermalTrace read_trace_csv(const std::string& path, double dt) {
    auto table = core::read_csv_file(path);
    ThermalTrace tr;
    tr.dt = dt;
    const auto cz = table.require_column("t_zone_c");
    const auto co = table.require_column("t_out_c");
    const auto cg = table.require_column("ghi_wm2");
    const auto cn = table.require_column("occupancy");
    const auto cq = table.require_column("q_hvac_w");
    std::vector<std::size_t> act_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& h = table.header[c];
        if (h.rfind("act_", 0) == 0) {
            tr.activity_names.push_back(h.substr(4));
            act_cols.push_back(c);
        } else if (c != cz && c != co && c != cg && c != cn && c != cq && h != "timestamp") {
            throw ParseError(path + ": unknown column '" + h + "'");
        }
    }
    tr.activity.resize(act_cols.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        tr.t_zone.push_back(table.number(r, cz));
        tr.t_out.push_back(table.number(r, co));
        double g = table.number(r, cg);
        if (g < 0.0) {
            throw ParseError(path + ":" + std::to_string(table.line_numbers[r]) + ": negative ghi_wm2");
        }
        tr.ghi.push_back(g);
        tr.occupancy.push_back(table.number(r, cn));
        tr.q_hvac.push_back(table.number(r, cq));
        for (std::size_t k = 0; k < act_cols.size(); ++k) tr.activity[k].push_back(table.number(r, act_cols[k]));
    }
    tr.validate();
    return tr;
}

void write_trace_csv(std::ostream& out, const ThermalTrace& trace) {
    out << "t_zone_c,t_out_c,ghi_wm2,occupancy,q_hvac_w";
    for (const auto& n : trace.activity_names) out << ",act_" << n;
    out << '\n';
    using core::format_double;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << format_double(trace.t_zone[i]) << ',' << format_double(trace.t_out[i]) << ','
            << format_double(trace.ghi[i]) << ',' << format_double(trace.occupancy[i]) << ','
            << format_double(trace.q_hvac[i]);
        for (const auto& a : trace.activity) out << ',' << format_double(a[i]);
        out << '\n';
    }
}

} // namespace bldgsim::thermal
