#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"
#include "bldgsim/core/environment.hpp"
#include "bldgsim/core/error.hpp"
#include "bldgsim/disturbance/occupancy.hpp"
#include "bldgsim/disturbance/weather.hpp"
#include "bldgsim/thermal/rc_zone.hpp"

namespace bldgsim::sim {

/// Every problem found in a scenario, each prefixed with file:line.
class ScenarioError : public ParseError {
public:
    explicit ScenarioError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct Entry {
    std::string value;
    std::size_t line = 0;
};

/// One `[name arg]` block with its `key = value` lines.
struct Section {
    std::string name;
    std::string arg;
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

/// Raw sectioned text: `#` comments, `[name]` or `[name arg]` headers and
/// `key = value` lines; leading/trailing whitespace is ignored.
std::vector<Section> parse_sections(const std::string& text, const std::string& source);

struct SimulationConfig {
    std::string name;
    std::string description;
    core::TimePoint start = core::parse_timestamp("2024-07-15 00:00");
    double duration_hours = 24.0;
    std::int64_t dt = 900;
    std::uint64_t seed = 1;
    std::string cluster = "c";

    std::int64_t steps() const;
};

struct OutputConfig {
    std::vector<std::string> columns;   // column-name prefixes; empty selects everything
    bool plots = false;
    double warmup_hours = 2.0;
};

struct GeneralizationConfig {
    std::string zone;                 // RC zone module used as oracle and test episode
    std::size_t train_days = 28;
    std::uint64_t seed = 99;
    int epochs = 200;
    std::size_t horizon = 96;
    std::string physics_head = "affine";
    int hidden = 8;
    int baseline_hidden = 32;
    std::string policy = "deadband";
    double setpoint = 24.0;
    double half_band = 1.0;
    double q_cool = 8000.0;
};

struct ScenarioConfig {
    std::string source;        // file path or "<string>"
    std::string base_dir;      // relative file references resolve here
    std::string text;          // verbatim scenario text
    SimulationConfig simulation;
    std::vector<Section> modules;       // [module <path>]
    std::vector<Section> controllers;   // [controller <path>]
    std::vector<Section> aggregates;    // [aggregate <path>]
    OutputConfig output;
    std::optional<GeneralizationConfig> generalization;
};

/// Syntax plus the keys of [simulation], [output] and [generalization].
/// Module and controller keys are checked by build_scenario().
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& source = "<string>",
                                   const std::string& base_dir = ".");
ScenarioConfig parse_scenario(const std::string& path);

/// What run_scenario needs to know besides the environment itself.
struct ZoneInfo {
    core::HierPath path;
    std::optional<std::pair<double, double>> band;   // comfort band of its controller
    std::optional<core::HierPath> controller;
    bool band_from_setpoint = false;                 // band follows the controller's `setpoint` action
    double half_band = 0.0;
    std::optional<thermal::RcZoneSpec> rc;
    core::HierPath weather, occupancy;
};

struct BuiltScenario {
    std::unique_ptr<core::Environment> env;
    std::vector<core::HierPath> buildings;   // power aggregation targets, one per system
    core::HierPath cluster;
    std::vector<ZoneInfo> zones;
    std::vector<core::HierPath> ders;
    std::vector<core::HierPath> mpcs;
    std::vector<core::HierPath> fcus;
    std::optional<core::HierPath> price;
    std::map<std::string, disturbance::SynthWeatherParams> synth_weather;        // by module path
    std::map<std::string, disturbance::SynthOccupancyParams> synth_occupancy;    // by module path
};

/// Instantiates modules and controllers, checks references, key sets and
/// wiring; throws ScenarioError listing every problem. `seed` overrides
/// the scenario seed.
BuiltScenario build_scenario(const ScenarioConfig& config, std::optional<std::uint64_t> seed = std::nullopt);

/// parse + build; returns the problems instead of throwing.
std::vector<std::string> validate_scenario(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

/// Seed of an occupancy source derived from the run seed and its local seed.
std::uint64_t mix_seed(std::uint64_t run_seed, std::uint64_t local);

} // namespace bldgsim::sim
