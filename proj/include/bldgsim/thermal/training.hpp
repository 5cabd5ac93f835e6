#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "bldgsim/core/clock.hpp"
#include "bldgsim/disturbance/occupancy.hpp"
#include "bldgsim/disturbance/weather.hpp"
#include "bldgsim/thermal/rc_zone.hpp"
#include "bldgsim/thermal/trace.hpp"
#include "bldgsim/thermal/zone_model.hpp"

namespace bldgsim::thermal {

enum class HvacPolicy { Off, Deadband, Proportional };

/// Synthetic RC-oracle data: day-to-day weather variation, seeded occupancy
/// and a simple cooling policy.
struct RcTraceConfig {
    std::size_t days = 7;
    double dt = 900.0;
    std::uint64_t seed = 7;
    core::TimePoint start = core::parse_timestamp("2024-06-03 00:00");
    disturbance::SynthWeatherParams weather;
    double t_mean_jitter = 2.0;    // K, uniform +- per day
    double cloud_jitter = 0.4;     // fraction of GHI removed at most, per day
    disturbance::SynthOccupancyParams occupancy;
    HvacPolicy policy = HvacPolicy::Deadband;
    double setpoint = 24.0;
    double half_band = 1.0;
    double q_cool = 8000.0;        // W, deadband cooling capacity
    double kp = 3000.0;            // W/K, proportional policy
    double initial_t = 24.0;
};

ThermalTrace generate_rc_trace(const RcZoneSpec& spec, const RcTraceConfig& config);

struct TrainConfig {
    std::size_t horizon = 96;
    int epochs = 200;
    double step = 0.05;
    double physics_weight = 0.0;
    std::size_t stride = 0;          // window stride, 0 = horizon
    bool fit_normalization = true;
    bool warm_start = true;          // least-squares output layer before descent
};

struct TrainResult {
    std::vector<double> loss_history;   // initial loss, then one entry per accepted epoch
    double seconds = 0.0;
    int iterations = 0;
    bool stalled = false;
    std::size_t windows = 0;
    std::size_t tape_nodes = 0;
};

/// Minimizes the mean squared error of multi-step rollouts started from the
/// measured temperature of each window, plus physics_weight times the mean
/// squared sign violation of the heads (models without structural projection).
TrainResult train(ZoneModel& model, const ThermalTrace& trace, const TrainConfig& config);

/// Loss of train() at the model's current parameters, with its gradient.
double rollout_loss(const ZoneModel& model, const ThermalTrace& trace, const TrainConfig& config,
                    std::vector<double>* grad = nullptr);

/// RMSE over all predicted points of H-step rollouts started every `stride`
/// steps (0 = horizon) from measured temperatures.
double rollout_rmse(const ZoneModel& model, const ThermalTrace& trace, std::size_t horizon, std::size_t stride = 0);
double one_step_rmse(const ZoneModel& model, const ThermalTrace& trace);

/// Up to three single-zone models coupled by conduction U_ij (W/K). The
/// conduction heat enters each zone through its HVAC channel.
class MultiZoneModel {
public:
    MultiZoneModel(std::vector<std::unique_ptr<ZoneModel>> zones, std::vector<std::vector<double>> conductance);

    std::size_t size() const noexcept { return zones_.size(); }
    const ZoneModel& zone(std::size_t i) const { return *zones_.at(i); }
    std::vector<double> step(const std::vector<double>& t_zone, const std::vector<Exogenous>& x,
                             const std::vector<double>& q_hvac) const;

private:
    std::vector<std::unique_ptr<ZoneModel>> zones_;
    std::vector<std::vector<double>> u_;
};

} // namespace bldgsim::thermal
