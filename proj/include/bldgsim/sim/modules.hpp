#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bldgsim/building/networks.hpp"
#include "bldgsim/control/controllers.hpp"
#include "bldgsim/control/mpc.hpp"
#include "bldgsim/core/module.hpp"
#include "bldgsim/der/battery.hpp"
#include "bldgsim/der/ev.hpp"
#include "bldgsim/der/pv.hpp"
#include "bldgsim/disturbance/occupancy.hpp"
#include "bldgsim/disturbance/price.hpp"
#include "bldgsim/disturbance/weather.hpp"
#include "bldgsim/hvac/fcu.hpp"
#include "bldgsim/thermal/rc_zone.hpp"
#include "bldgsim/thermal/zone_model.hpp"

// Environment adapters for the physical models and controllers.
namespace bldgsim::sim {

using core::DataKind;
using core::HierPath;
using core::InputDecl;
using core::OutputDecl;
using core::StepContext;
using core::Unit;

// --- disturbances ----------------------------------------------------------

struct WeatherSource {
    std::optional<disturbance::SynthWeatherParams> synth;
    double wet_bulb_depression = 6.0;   // K, synthetic wet bulb below dry bulb
    std::optional<disturbance::WeatherSeries> series;

    disturbance::WeatherRecord at(const core::SimClock& clock) const;
};

/// Publishes t_out, ghi, t_wb.
class WeatherModule final : public core::Module {
public:
    WeatherModule(HierPath path, WeatherSource source);
    std::vector<InputDecl> inputs() const override { return {}; }
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    WeatherSource src_;
};

/// Publishes price ($/kWh) and is_peak.
class PriceModule final : public core::Module {
public:
    PriceModule(HierPath path, disturbance::PriceSchedule schedule);
    std::vector<InputDecl> inputs() const override { return {}; }
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    disturbance::PriceSchedule schedule_;
};

struct OccupancySource {
    std::optional<disturbance::SynthOccupancyParams> synth;
    std::optional<disturbance::OccupancySeries> series;

    std::vector<std::string> activity_names() const;
    disturbance::OccupancyRecord at(const core::SimClock& clock) const;
};

/// Publishes occupied, occupants, offset_k and act_<name> per activity.
class OccupancyModule final : public core::Module {
public:
    OccupancyModule(HierPath path, OccupancySource source);
    std::vector<InputDecl> inputs() const override { return {}; }
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;
    const std::vector<std::string>& activity_names() const noexcept { return names_; }

private:
    OccupancySource src_;
    std::vector<std::string> names_;
};

std::string activity_variable(const std::string& name);

// --- dynamics --------------------------------------------------------------

struct ZoneSpec {
    thermal::RcZoneSpec rc;
    std::shared_ptr<const thermal::ZoneModel> model;   // replaces the RC step when set
    double initial_t = 24.0;
};

/// Zone temperature (state t_zone). Sums q_zone of the listed HVAC units.
class ZoneModule final : public core::Module {
public:
    ZoneModule(HierPath path, ZoneSpec spec, HierPath weather, HierPath occupancy,
               std::vector<std::string> activity_names, std::vector<HierPath> hvac);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void initialize() override { t_ = spec_.initial_t; }
    void step(StepContext& ctx) override;

private:
    ZoneSpec spec_;
    HierPath weather_, occupancy_;
    std::vector<std::string> names_;
    std::vector<HierPath> hvac_;
    double t_ = 0.0;
};

/// Fan coil unit driven by t_sa_setpoint / v_sa_setpoint actions of `controller`.
/// Reads the zone temperature of the previous step.
class FcuModule final : public core::Module {
public:
    FcuModule(HierPath path, hvac::FcuAssembly assembly, HierPath controller, HierPath zone, HierPath weather);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    hvac::FcuAssembly a_;
    HierPath controller_, zone_, weather_;
};

/// Stand-alone fan following `setpoint` (kg/s).
class FanModule final : public core::Module {
public:
    FanModule(HierPath path, hvac::FanSpec spec, core::SignalKey setpoint);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    hvac::FanSpec spec_;
    core::SignalKey setpoint_;
};

/// Plug, lighting and base load of a building.
class LoadsModule final : public core::Module {
public:
    LoadsModule(HierPath path, building::ElectricalNetworkSpec spec, HierPath occupancy,
                std::vector<std::string> activity_names);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    building::ElectricalNetworkSpec spec_;
    HierPath occupancy_;
    std::vector<std::string> names_;
};

/// Hot water tank; heater fraction from `controller`, draws from activity flags.
class TankModule final : public core::Module {
public:
    TankModule(HierPath path, building::WaterTankSpec spec, std::map<std::string, double> draws, double initial_t,
               HierPath occupancy, HierPath controller);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void initialize() override { state_.t_tank = initial_; }
    void step(StepContext& ctx) override;

private:
    building::WaterTankSpec spec_;
    std::map<std::string, double> draws_;
    double initial_;
    HierPath occupancy_, controller_;
    building::WaterTankState state_;
};

struct EvUnit {
    std::string name;
    der::EvParams params;
    double initial_soc = 0.5;
};

struct DerSpec {
    std::optional<der::PvSpec> pv;
    std::optional<der::BatteryParams> battery;
    double battery_initial_soc = 0.5;
    std::vector<EvUnit> evs;
    bool grid_export = false;       // PV surplus exported instead of curtailed
    bool ev_grid_charging = true;   // EVs charge at full rate from the grid as well
};

/// PV, battery and EVs behind one meter. PV follows the waterfall
/// (building, EV, battery, spill); the grid is the slack. Publishes the net
/// DER contribution as `power`, so the building aggregate equals grid import.
class DerModule final : public core::Module {
public:
    DerModule(HierPath path, DerSpec spec, std::vector<HierPath> loads, std::optional<HierPath> controller,
              HierPath weather);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void initialize() override;
    void step(StepContext& ctx) override;

    const DerSpec& spec() const noexcept { return spec_; }
    /// Events raised by the EVs so far (cleared by reset).
    const std::vector<std::pair<std::int64_t, der::EvEvent>>& ev_events() const noexcept { return events_; }

private:
    DerSpec spec_;
    std::vector<HierPath> loads_;
    std::optional<HierPath> controller_;
    HierPath weather_;
    der::BatteryState battery_;
    std::vector<der::EvState> ev_;
    std::vector<std::pair<std::int64_t, der::EvEvent>> events_;
};

// --- controllers -----------------------------------------------------------

/// v_reference = mean + amplitude sin(2 pi hour / period).
class SinusoidReference final : public core::Module {
public:
    SinusoidReference(HierPath path, double mean, double amplitude, double period_hours = 24.0);
    std::vector<InputDecl> inputs() const override { return {}; }
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    double mean_, amp_, period_;
};

/// Component tracking controller: v_setpoint = track(reference).
class TrackingController final : public core::Module {
public:
    TrackingController(HierPath path, core::SignalKey reference, control::TrackMode mode, double lo, double hi,
                       std::vector<double> stages = {});
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    core::SignalKey ref_;
    control::TrackMode mode_;
    double lo_, hi_;
    std::vector<double> stages_;
};

struct HvacCommand {
    double v_sa_rated = 1.0;     // kg/s while cooling
    double t_sa_design = 13.0;   // degC
};

/// Deadband zone controller. The setpoint follows the occupant comfort
/// offset; a cluster curtail fraction scales the supply airflow.
class DeadbandHvacController final : public core::Module {
public:
    DeadbandHvacController(HierPath path, control::DeadbandConfig config, HvacCommand command, HierPath zone,
                           std::optional<HierPath> occupancy, std::optional<core::SignalKey> curtail);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void initialize() override { on_ = false; }
    void step(StepContext& ctx) override;

private:
    control::DeadbandConfig cfg_;
    HvacCommand cmd_;
    HierPath zone_;
    std::optional<HierPath> occupancy_;
    std::optional<core::SignalKey> curtail_;
    bool on_ = false;
};

/// Receding-horizon MPC on zone thermal power. Disturbances are forecast by
/// seasonal naive once a day of history exists and by persistence before.
/// The first action is realized as a supply-air command at rated airflow.
class MpcHvacController final : public core::Module {
public:
    MpcHvacController(HierPath path, control::MpcConfig config, control::ActionBounds bounds,
                      std::shared_ptr<const thermal::ZoneModel> model, HvacCommand command, HierPath zone,
                      HierPath weather, HierPath occupancy, HierPath price);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void initialize() override;
    void step(StepContext& ctx) override;

private:
    control::MpcForecast forecast(const core::SimClock& clock) const;

    control::MpcConfig cfg_;
    control::ActionBounds bounds_;
    std::shared_ptr<const thermal::ZoneModel> model_;
    HvacCommand cmd_;
    HierPath zone_, weather_, occupancy_, price_;
    std::optional<control::RecedingHorizon> rh_;
    std::vector<std::vector<double>> history_;   // t_out, ghi, occupants, price, activities...
};

/// PID heater loop on a tank temperature; output heater fraction.
class PidTankController final : public core::Module {
public:
    PidTankController(HierPath path, control::PidConfig config, double setpoint, HierPath tank);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void initialize() override { state_ = {}; }
    void step(StepContext& ctx) override;

private:
    control::PidConfig cfg_;
    double setpoint_;
    HierPath tank_;
    control::PidState state_;
};

/// TOU battery dispatch from the DER module's SOC and the previous step's
/// unmet load.
class TouDispatchController final : public core::Module {
public:
    TouDispatchController(HierPath path, control::TouDispatchConfig config, control::StorageView battery, HierPath der,
                          HierPath price);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

private:
    control::TouDispatchConfig cfg_;
    control::StorageView battery_;
    HierPath der_, price_;
};

/// Cluster peak coordinator: reads building power aggregates of the previous
/// step and publishes curtail_<system> fractions.
class PeakCoordinatorModule final : public core::Module {
public:
    PeakCoordinatorModule(HierPath path, double cap, std::vector<HierPath> buildings);
    std::vector<InputDecl> inputs() const override;
    std::vector<OutputDecl> outputs() const override;
    void step(StepContext& ctx) override;

    static std::string curtail_variable(const HierPath& building);

private:
    double cap_;
    std::vector<HierPath> buildings_;
};

} // namespace bldgsim::sim
