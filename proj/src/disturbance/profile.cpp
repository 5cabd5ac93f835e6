#include "bldgsim/disturbance/profile.hpp"

#include <algorithm>

#include "bldgsim/core/csv.hpp"
#include "bldgsim/core/error.hpp"

namespace bldgsim::disturbance {

std::size_t Profile::size() const { return columns.empty() ? 0 : columns.begin()->second.size(); }

const std::vector<double>& Profile::column(const std::string& name) const {
    auto it = columns.find(name);
    if (it == columns.end()) throw InvalidArgument("profile has no column '" + name + "'");
    return it->second;
}

Profile load_profile_csv(const std::string& path, const std::vector<std::string>& required,
                         const std::vector<std::string>& optional, std::int64_t target_dt, bool allow_extra) {
    const auto table = core::read_csv_file(path);
    const auto tcol = table.require_column("timestamp");
    for (const auto& r : required) table.require_column(r);
    for (const auto& h : table.header) {
        if (h == "timestamp") continue;
        const bool known = std::find(required.begin(), required.end(), h) != required.end() ||
                           std::find(optional.begin(), optional.end(), h) != optional.end();
        if (!known && !allow_extra) throw ParseError(path + ": unknown column '" + h + "'");
    }
    if (table.rows.empty()) throw ParseError(path + ": no data rows");

    std::vector<core::TimePoint> stamps;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            stamps.push_back(core::parse_timestamp(table.rows[r][tcol]));
        } catch (const Error& e) {
            throw ParseError(path + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
        }
    }
    std::int64_t file_dt = target_dt > 0 ? target_dt : 3600;
    if (stamps.size() > 1) file_dt = (stamps[1] - stamps[0]).count();
    for (std::size_t r = 1; r < stamps.size(); ++r) {
        const auto d = (stamps[r] - stamps[r - 1]).count();
        if (d <= 0 || d != file_dt) {
            throw ParseError(path + ":" + std::to_string(table.line_numbers[r]) +
                             ": timestamps must increase at a constant step");
        }
    }
    std::int64_t repeat = 1;
    if (target_dt > 0) {
        if (file_dt < target_dt || file_dt % target_dt != 0) {
            throw ParseError(path + ": file step " + std::to_string(file_dt) + " s is not a multiple of " +
                             std::to_string(target_dt) + " s");
        }
        repeat = file_dt / target_dt;
    }

    Profile p;
    p.start = stamps.front();
    p.dt_seconds = file_dt / repeat;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == tcol) continue;
        auto& out = p.columns[table.header[c]];
        out.reserve(table.rows.size() * static_cast<std::size_t>(repeat));
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const double v = table.number(r, c);
            for (std::int64_t k = 0; k < repeat; ++k) out.push_back(v);
        }
    }
    return p;
}

} // namespace bldgsim::disturbance
