#pragma once

#include <map>
#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"

namespace bldgsim::disturbance {

/// Numeric columns of a timestamped CSV at a constant step.
struct Profile {
    core::TimePoint start{};
    std::int64_t dt_seconds = 0;
    std::map<std::string, std::vector<double>> columns;

    std::size_t size() const;
    const std::vector<double>& column(const std::string& name) const;
};

/// Reads a CSV whose first column is `timestamp`. Every name in `required`
/// must be present; other columns are accepted only if listed in `optional`
/// or when `allow_extra` is set. Timestamps must be strictly increasing at a
/// constant step that is a multiple of `target_dt`; coarser rows are repeated
/// (hold-forward). Pass target_dt = 0 to keep the file step.
Profile load_profile_csv(const std::string& path, const std::vector<std::string>& required,
                         const std::vector<std::string>& optional = {}, std::int64_t target_dt = 0,
                         bool allow_extra = false);

} // namespace bldgsim::disturbance
