#pragma once

#include <string>
#include <vector>

namespace bldgsim::sim {

/// Plot names: fan_tracking, zone_temperature, soc, load_stack, cumulative_energy.
const std::vector<std::string>& plot_names();

/// Reads <run_dir>/timeseries.csv and writes <name>.svg per plot. With an
/// empty `requested` list every plot whose columns exist is drawn and the
/// others are skipped with a notice; an explicitly requested plot without
/// its columns throws ParseError. Returns the written paths.
std::vector<std::string> emit_plots(const std::string& run_dir, const std::vector<std::string>& requested = {},
                                    std::vector<std::string>* notices = nullptr);

} // namespace bldgsim::sim
