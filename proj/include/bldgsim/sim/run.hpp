#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bldgsim/sim/scenario.hpp"
#include "bldgsim/thermal/zone_model.hpp"

namespace bldgsim::sim {

inline constexpr const char* kVersion = "1.0.0";

struct BuildingMetrics {
    std::string path;
    double energy_kwh = 0.0;   // sum of P dt of the building power aggregate
    double cost = 0.0;         // $, energy at the running price
    double peak_w = 0.0;
    double pv_kwh = 0.0;
    std::optional<double> self_consumption;   // PV used on site / PV produced
};

struct ZoneMetrics {
    std::string path;
    bool banded = false;            // a controller defines a comfort band
    double violation_hours = 0.0;   // time outside the band after warm-up
    double in_band_fraction = 1.0;
    std::size_t steps = 0;          // steps after warm-up
    double t_min = 0.0, t_max = 0.0;
};

struct MpcMetrics {
    std::string path;
    double mean_abs_mismatch_w = 0.0;   // |q_target - realized zone HVAC power|
    double mean_iterations = 0.0;
};

struct GeneralizationResult {
    double physics_rmse = 0.0;
    double baseline_rmse = 0.0;
    thermal::ViolationReport physics_violation;
    thermal::ViolationReport baseline_violation;
    double physics_train_seconds = 0.0;
    double baseline_train_seconds = 0.0;
    std::size_t train_steps = 0;
    std::size_t test_steps = 0;
    std::size_t horizon = 0;
};

struct RunMetrics {
    std::string scenario;
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    double dt_hours = 0.0;
    double warmup_hours = 0.0;
    std::vector<BuildingMetrics> buildings;
    double cluster_energy_kwh = 0.0;
    double cluster_peak_w = 0.0;
    double cluster_cost = 0.0;
    std::vector<ZoneMetrics> zones;
    std::vector<MpcMetrics> mpcs;
    std::size_t ev_events = 0;
    std::size_t ev_shortfalls = 0;
    double wall_seconds = 0.0;
    std::optional<GeneralizationResult> generalization;

    std::string to_json() const;
};

using StepObserver = std::function<void(const BuiltScenario&, const core::SignalFrame&)>;

struct RunOptions {
    std::optional<std::string> out_dir;   // no files are written when empty
    std::optional<std::uint64_t> seed;
    bool plots = false;                   // or [output] plots = true
    StepObserver observer;                // called after every step
};

/// Builds and runs the scenario; writes timeseries.csv, metrics.json,
/// manifest.json (plus plots and generalization.csv when applicable).
/// Module errors surface as RuntimeError naming step and path.
RunMetrics run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Run manifest: config hash, seed, versions and the verbatim scenario.
std::string manifest_json(const ScenarioConfig& config, std::uint64_t seed);

struct Replay {
    ScenarioConfig config;
    std::uint64_t seed = 0;
};
/// Recovers the scenario and seed from a manifest; checks the config hash.
Replay read_manifest(const std::string& path);

/// Thermal series of one zone taken from recorded frames: t_zone[k] is the
/// temperature entering step k, exogenous rows are the inputs of step k.
thermal::ThermalTrace zone_trace(const std::vector<core::SignalFrame>& frames, const ZoneInfo& zone,
                                 const std::vector<std::string>& activity_names, double initial_t, double dt);

/// Trains a physics-structured and an unconstrained model on RC-oracle data
/// with HVAC cycling and evaluates both on `test`.
GeneralizationResult run_generalization(const GeneralizationConfig& config, const thermal::RcZoneSpec& rc,
                                        const disturbance::SynthWeatherParams& weather,
                                        const disturbance::SynthOccupancyParams& occupancy,
                                        const thermal::ThermalTrace& test, core::TimePoint test_start,
                                        std::vector<std::vector<double>>* predictions = nullptr);

} // namespace bldgsim::sim
