#include "bldgsim/sim/modules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bldgsim/core/error.hpp"
#include "bldgsim/disturbance/forecast.hpp"
#include "bldgsim/hvac/components.hpp"

namespace bldgsim::sim {

namespace {

constexpr DataKind kState = DataKind::State;
constexpr DataKind kAction = DataKind::Action;
constexpr DataKind kDist = DataKind::Disturbance;
constexpr DataKind kObs = DataKind::Observation;

InputDecl in(const HierPath& p, std::string var, DataKind kind, Unit unit, bool lagged = false) {
    return InputDecl{core::SignalKey{p, std::move(var), kind}, unit, lagged};
}

std::size_t series_index(core::TimePoint start, std::int64_t dt, std::size_t size, const core::SimClock& clock,
                         const char* what) {
    const auto offset = (clock.now() - start).count();
    if (dt <= 0 || offset < 0 || offset % dt != 0 || static_cast<std::size_t>(offset / dt) >= size) {
        throw RuntimeError(std::string(what) + " series does not cover " + core::format_timestamp(clock.now()));
    }
    return static_cast<std::size_t>(offset / dt);
}

} // namespace

std::string activity_variable(const std::string& name) { return "act_" + name; }

// --- disturbances ----------------------------------------------------------

disturbance::WeatherRecord WeatherSource::at(const core::SimClock& clock) const {
    disturbance::WeatherRecord r;
    if (series) {
        r = series->records[series_index(series->start, series->dt_seconds, series->records.size(), clock, "weather")];
    } else if (synth) {
        r = disturbance::synth_weather(*synth, clock);
    } else {
        throw RuntimeError("weather source has neither a series nor synthetic parameters");
    }
    if (!r.t_wb) r.t_wb = r.t_out - wet_bulb_depression;
    return r;
}

WeatherModule::WeatherModule(HierPath path, WeatherSource source)
    : Module(std::move(path), core::ModuleKind::Disturbance), src_(std::move(source)) {}

std::vector<OutputDecl> WeatherModule::outputs() const {
    return {{"t_out", kDist, Unit::Celsius, 20.0},
            {"ghi", kDist, Unit::WattPerSquareMeter, 0.0},
            {"t_wb", kDist, Unit::Celsius, 15.0}};
}

void WeatherModule::step(StepContext& ctx) {
    const auto r = src_.at(ctx.clock());
    ctx.write("t_out", kDist, r.t_out);
    ctx.write("ghi", kDist, r.ghi);
    ctx.write("t_wb", kDist, *r.t_wb);
}

PriceModule::PriceModule(HierPath path, disturbance::PriceSchedule schedule)
    : Module(std::move(path), core::ModuleKind::Disturbance), schedule_(std::move(schedule)) {
    schedule_.validate();
}

std::vector<OutputDecl> PriceModule::outputs() const {
    return {{"price", kDist, Unit::UsdPerKiloWattHour, 0.0}, {"is_peak", kDist, Unit::Flag, 0.0}};
}

void PriceModule::step(StepContext& ctx) {
    const auto& c = ctx.clock();
    ctx.write("price", kDist, disturbance::price_at(schedule_, c.step(), c.hour_of_day()));
    ctx.write("is_peak", kDist, schedule_.is_peak(c.hour_of_day()) ? 1.0 : 0.0);
}

std::vector<std::string> OccupancySource::activity_names() const {
    std::vector<std::string> out;
    if (series) {
        if (!series->records.empty()) {
            for (const auto& [name, on] : series->records.front().activity) out.push_back(name);
        }
    } else if (synth) {
        for (const auto& a : synth->activities) out.push_back(a.name);
    }
    return out;
}

disturbance::OccupancyRecord OccupancySource::at(const core::SimClock& clock) const {
    if (series) {
        return series->records[series_index(series->start, series->dt_seconds, series->records.size(), clock,
                                            "occupancy")];
    }
    if (synth) return disturbance::synth_occupancy(*synth, clock);
    throw RuntimeError("occupancy source has neither a series nor synthetic parameters");
}

OccupancyModule::OccupancyModule(HierPath path, OccupancySource source)
    : Module(std::move(path), core::ModuleKind::Disturbance), src_(std::move(source)), names_(src_.activity_names()) {}

std::vector<OutputDecl> OccupancyModule::outputs() const {
    std::vector<OutputDecl> out = {{"occupied", kDist, Unit::Flag, 0.0},
                                   {"occupants", kDist, Unit::Count, 0.0},
                                   {"offset_k", kDist, Unit::Kelvin, 0.0}};
    for (const auto& n : names_) out.push_back({activity_variable(n), kDist, Unit::Flag, 0.0});
    return out;
}

void OccupancyModule::step(StepContext& ctx) {
    const auto r = src_.at(ctx.clock());
    ctx.write("occupied", kDist, r.occupied ? 1.0 : 0.0);
    ctx.write("occupants", kDist, r.occupants);
    ctx.write("offset_k", kDist, r.offset_k);
    for (const auto& n : names_) {
        auto it = r.activity.find(n);
        ctx.write(activity_variable(n), kDist, it != r.activity.end() && it->second ? 1.0 : 0.0);
    }
}

// --- zone and HVAC ---------------------------------------------------------

ZoneModule::ZoneModule(HierPath path, ZoneSpec spec, HierPath weather, HierPath occupancy,
                       std::vector<std::string> activity_names, std::vector<HierPath> hvac)
    : Module(std::move(path), core::ModuleKind::DynamicStateful),
      spec_(std::move(spec)),
      weather_(std::move(weather)),
      occupancy_(std::move(occupancy)),
      names_(std::move(activity_names)),
      hvac_(std::move(hvac)),
      t_(spec_.initial_t) {
    if (!spec_.model) spec_.rc.validate();
}

std::vector<InputDecl> ZoneModule::inputs() const {
    std::vector<InputDecl> v = {in(weather_, "t_out", kDist, Unit::Celsius), in(weather_, "ghi", kDist, Unit::WattPerSquareMeter),
                                in(occupancy_, "occupants", kDist, Unit::Count)};
    for (const auto& n : names_) v.push_back(in(occupancy_, activity_variable(n), kDist, Unit::Flag));
    for (const auto& h : hvac_) v.push_back(in(h, "q_zone", kObs, Unit::Watt));
    return v;
}

std::vector<OutputDecl> ZoneModule::outputs() const {
    return {{"t_zone", kState, Unit::Celsius, spec_.initial_t}, {"q_hvac", kObs, Unit::Watt, 0.0}};
}

void ZoneModule::step(StepContext& ctx) {
    const double t_out = ctx.read(weather_, "t_out", kDist);
    const double ghi = ctx.read(weather_, "ghi", kDist);
    const double occ = ctx.read(occupancy_, "occupants", kDist);
    std::vector<double> act;
    for (const auto& n : names_) act.push_back(ctx.read(occupancy_, activity_variable(n), kDist));
    double q = 0.0;
    for (const auto& h : hvac_) q += ctx.read(h, "q_zone", kObs);
    const double dt = static_cast<double>(ctx.clock().dt_seconds());

    if (spec_.model) {
        if (std::abs(spec_.model->dt() - dt) > 1e-9) {
            throw RuntimeError("zone model step " + std::to_string(spec_.model->dt()) + " s differs from clock step");
        }
        thermal::Exogenous x{t_out, ghi, occ, {}};
        for (const auto& n : spec_.model->activity_names()) {
            auto it = std::find(names_.begin(), names_.end(), n);
            x.activity.push_back(it == names_.end() ? 0.0 : act[static_cast<std::size_t>(it - names_.begin())]);
        }
        t_ = spec_.model->step(t_, x, q);
    } else {
        const double q_int = spec_.rc.internal_gain(occ, names_, act);
        t_ = thermal::rc_ground_truth_step(spec_.rc, t_, t_out, q_int, spec_.rc.solar_gain(ghi), q, dt);
    }
    ctx.write("t_zone", kState, t_);
    ctx.write("q_hvac", kObs, q);
}

FcuModule::FcuModule(HierPath path, hvac::FcuAssembly assembly, HierPath controller, HierPath zone, HierPath weather)
    : Module(std::move(path), core::ModuleKind::DynamicStateless),
      a_(std::move(assembly)),
      controller_(std::move(controller)),
      zone_(std::move(zone)),
      weather_(std::move(weather)) {
    a_.validate();
}

std::vector<InputDecl> FcuModule::inputs() const {
    return {in(controller_, "t_sa_setpoint", kAction, Unit::Celsius), in(controller_, "v_sa_setpoint", kAction, Unit::KgPerSecond),
            in(zone_, "t_zone", kState, Unit::Celsius, true), in(weather_, "t_wb", kDist, Unit::Celsius)};
}

std::vector<OutputDecl> FcuModule::outputs() const {
    return {{"q_zone", kObs, Unit::Watt, 0.0},    {"power", kObs, Unit::Watt, 0.0},
            {"t_sa", kObs, Unit::Celsius, 20.0},  {"v_sa", kObs, Unit::KgPerSecond, 0.0},
            {"p_fan", kObs, Unit::Watt, 0.0},     {"p_pump", kObs, Unit::Watt, 0.0},
            {"p_chiller", kObs, Unit::Watt, 0.0}, {"p_tower", kObs, Unit::Watt, 0.0},
            {"cop", kObs, Unit::None, 0.0},       {"m_water", kObs, Unit::KgPerSecond, 0.0}};
}

void FcuModule::step(StepContext& ctx) {
    hvac::FcuAction act;
    act.t_sa_setpoint = ctx.read(controller_, "t_sa_setpoint", kAction);
    act.v_sa_setpoint = ctx.read(controller_, "v_sa_setpoint", kAction);
    const double t_zone = ctx.read(zone_, "t_zone", kState);
    const double t_wb = ctx.read(weather_, "t_wb", kDist);
    const auto o = hvac::fcu_system_step(a_, act, t_zone, t_wb);
    ctx.write("q_zone", kObs, o.q_zone);
    ctx.write("power", kObs, o.p_total);
    ctx.write("t_sa", kObs, o.t_sa);
    ctx.write("v_sa", kObs, o.v_sa);
    ctx.write("p_fan", kObs, o.p_fan);
    ctx.write("p_pump", kObs, o.p_pump);
    ctx.write("p_chiller", kObs, o.p_chiller);
    ctx.write("p_tower", kObs, o.p_tower);
    ctx.write("cop", kObs, o.cop);
    ctx.write("m_water", kObs, o.m_water);
}

FanModule::FanModule(HierPath path, hvac::FanSpec spec, core::SignalKey setpoint)
    : Module(std::move(path), core::ModuleKind::DynamicStateless), spec_(std::move(spec)), setpoint_(std::move(setpoint)) {
    spec_.validate();
}

std::vector<InputDecl> FanModule::inputs() const { return {{setpoint_, Unit::KgPerSecond, false}}; }

std::vector<OutputDecl> FanModule::outputs() const {
    return {{"flow", kObs, Unit::KgPerSecond, 0.0}, {"power", kObs, Unit::Watt, 0.0}};
}

void FanModule::step(StepContext& ctx) {
    const auto r = hvac::fan_step(spec_, ctx.read(setpoint_));
    ctx.write("flow", kObs, r.flow);
    ctx.write("power", kObs, r.power);
}

// --- building networks -----------------------------------------------------

LoadsModule::LoadsModule(HierPath path, building::ElectricalNetworkSpec spec, HierPath occupancy,
                         std::vector<std::string> activity_names)
    : Module(std::move(path), core::ModuleKind::DynamicStateless), spec_(std::move(spec)), occupancy_(std::move(occupancy)) {
    spec_.validate();
    for (auto& n : activity_names) {
        if (spec_.appliances.count(n) || n == spec_.lighting) names_.push_back(std::move(n));
    }
}

std::vector<InputDecl> LoadsModule::inputs() const {
    std::vector<InputDecl> v = {in(occupancy_, "occupied", kDist, Unit::Flag)};
    for (const auto& n : names_) v.push_back(in(occupancy_, activity_variable(n), kDist, Unit::Flag));
    return v;
}

std::vector<OutputDecl> LoadsModule::outputs() const {
    return {{"power", kObs, Unit::Watt, spec_.base_load},
            {"p_base", kObs, Unit::Watt, spec_.base_load},
            {"p_plug", kObs, Unit::Watt, 0.0},
            {"p_lighting", kObs, Unit::Watt, 0.0}};
}

void LoadsModule::step(StepContext& ctx) {
    std::map<std::string, bool> flags;
    for (const auto& n : names_) flags[n] = ctx.read(occupancy_, activity_variable(n), kDist) > 0.5;
    const bool occupied = ctx.read(occupancy_, "occupied", kDist) > 0.5;
    const auto b = building::electrical_breakdown(spec_, flags, occupied);
    ctx.write("power", kObs, b.total());
    ctx.write("p_base", kObs, b.base);
    ctx.write("p_plug", kObs, b.plug);
    ctx.write("p_lighting", kObs, b.lighting);
}

TankModule::TankModule(HierPath path, building::WaterTankSpec spec, std::map<std::string, double> draws,
                       double initial_t, HierPath occupancy, HierPath controller)
    : Module(std::move(path), core::ModuleKind::DynamicStateful),
      spec_(std::move(spec)),
      draws_(std::move(draws)),
      initial_(initial_t),
      occupancy_(std::move(occupancy)),
      controller_(std::move(controller)) {
    spec_.validate();
    state_.t_tank = initial_;
}

std::vector<InputDecl> TankModule::inputs() const {
    std::vector<InputDecl> v = {in(controller_, "heater", kAction, Unit::Fraction)};
    for (const auto& [n, rate] : draws_) v.push_back(in(occupancy_, activity_variable(n), kDist, Unit::Flag));
    return v;
}

std::vector<OutputDecl> TankModule::outputs() const {
    return {{"t_tank", kState, Unit::Celsius, initial_}, {"power", kObs, Unit::Watt, 0.0}, {"draw", kObs, Unit::KgPerSecond, 0.0}};
}

void TankModule::step(StepContext& ctx) {
    std::map<std::string, bool> flags;
    for (const auto& [n, rate] : draws_) flags[n] = ctx.read(occupancy_, activity_variable(n), kDist) > 0.5;
    const double draw = building::dhw_demand(flags, draws_);
    const double heater = std::clamp(ctx.read(controller_, "heater", kAction), 0.0, 1.0);
    const auto r =
        building::water_tank_step(spec_, state_, heater, draw, static_cast<double>(ctx.clock().dt_seconds()));
    state_ = r.next;
    ctx.write("t_tank", kState, state_.t_tank);
    ctx.write("power", kObs, r.p_heater);
    ctx.write("draw", kObs, draw);
}

// --- DER -------------------------------------------------------------------

DerModule::DerModule(HierPath path, DerSpec spec, std::vector<HierPath> loads, std::optional<HierPath> controller,
                     HierPath weather)
    : Module(std::move(path), core::ModuleKind::DynamicStateful),
      spec_(std::move(spec)),
      loads_(std::move(loads)),
      controller_(std::move(controller)),
      weather_(std::move(weather)) {
    if (spec_.pv) spec_.pv->validate();
    if (spec_.battery) spec_.battery->validate();
    for (const auto& ev : spec_.evs) ev.params.validate();
    initialize();
}

void DerModule::initialize() {
    battery_ = der::BatteryState{spec_.battery_initial_soc, 1.0};
    ev_.clear();
    for (const auto& ev : spec_.evs) ev_.push_back(der::EvState{der::BatteryState{ev.initial_soc, 1.0}, 0, false});
    events_.clear();
}

std::vector<InputDecl> DerModule::inputs() const {
    std::vector<InputDecl> v = {in(weather_, "t_out", kDist, Unit::Celsius), in(weather_, "ghi", kDist, Unit::WattPerSquareMeter)};
    for (const auto& l : loads_) v.push_back(in(l, "power", kObs, Unit::Watt));
    if (controller_) v.push_back(in(*controller_, "p_battery_request", kAction, Unit::Watt));
    return v;
}

std::vector<OutputDecl> DerModule::outputs() const {
    std::vector<OutputDecl> v = {{"p_load", kObs, Unit::Watt, 0.0},       {"p_pv", kObs, Unit::Watt, 0.0},
                                 {"pv_to_building", kObs, Unit::Watt, 0.0}, {"pv_to_ev", kObs, Unit::Watt, 0.0},
                                 {"pv_to_battery", kObs, Unit::Watt, 0.0},  {"pv_spill", kObs, Unit::Watt, 0.0},
                                 {"p_grid", kObs, Unit::Watt, 0.0},        {"power", kObs, Unit::Watt, 0.0},
                                 {"p_ev", kObs, Unit::Watt, 0.0}};
    if (spec_.battery) {
        v.push_back({"p_battery", kObs, Unit::Watt, 0.0});
        v.push_back({"soc_battery", kState, Unit::Fraction, spec_.battery_initial_soc});
        v.push_back({"soh_battery", kState, Unit::Fraction, 1.0});
    }
    for (const auto& ev : spec_.evs) {
        v.push_back({"p_ev_" + ev.name, kObs, Unit::Watt, 0.0});
        v.push_back({"soc_ev_" + ev.name, kState, Unit::Fraction, ev.initial_soc});
        v.push_back({"present_ev_" + ev.name, kObs, Unit::Flag, 0.0});
    }
    return v;
}

void DerModule::step(StepContext& ctx) {
    const auto& clock = ctx.clock();
    const double dt = static_cast<double>(clock.dt_seconds());
    const double t_out = ctx.read(weather_, "t_out", kDist);
    const double ghi = ctx.read(weather_, "ghi", kDist);
    double load = 0.0;
    for (const auto& l : loads_) load += ctx.read(l, "power", kObs);
    const double p_pv = spec_.pv ? der::pv_power(*spec_.pv, ghi, t_out) : 0.0;

    // EV requests: full rate while plugged in, or PV surplus only.
    std::vector<double> ev_limit(spec_.evs.size(), 0.0);
    double ev_headroom = 0.0;
    for (std::size_t i = 0; i < spec_.evs.size(); ++i) {
        if (!der::ev_available(spec_.evs[i].params, clock.now())) continue;
        ev_limit[i] = der::battery_charge_limit(spec_.evs[i].params.battery, ev_[i].battery, t_out, dt);
        ev_headroom += ev_limit[i];
    }
    const double batt_headroom =
        spec_.battery ? der::battery_charge_limit(*spec_.battery, battery_, t_out, dt) : 0.0;
    const auto plan = control::pv_allocation(p_pv, std::max(0.0, load), ev_headroom, batt_headroom);

    double p_ev_total = 0.0;
    for (std::size_t i = 0; i < spec_.evs.size(); ++i) {
        double request = 0.0;
        if (ev_limit[i] > 0.0) {
            request = spec_.ev_grid_charging ? ev_limit[i] : plan.to_ev * ev_limit[i] / ev_headroom;
        }
        const auto r = der::ev_step(spec_.evs[i].params, ev_[i], request, clock.now(), dt, t_out);
        ev_[i] = r.next;
        for (const auto& e : r.events) events_.emplace_back(clock.step(), e);
        p_ev_total += r.p_actual;
        ctx.write("p_ev_" + spec_.evs[i].name, kObs, r.p_actual);
        ctx.write("soc_ev_" + spec_.evs[i].name, kState, ev_[i].battery.soc);
        ctx.write("present_ev_" + spec_.evs[i].name, kObs, r.available ? 1.0 : 0.0);
    }

    double p_batt = 0.0;
    if (spec_.battery) {
        const double unmet = std::max(0.0, load - plan.to_building);
        double request = controller_ ? ctx.read(*controller_, "p_battery_request", kAction) : -unmet;
        if (plan.to_battery > 0.0) {
            request = std::max(request, plan.to_battery);
        } else if (request < 0.0) {
            request = std::max(request, -unmet);
        }
        const auto r = der::battery_step(*spec_.battery, battery_, request, t_out, dt);
        battery_.soc = r.next.soc;
        battery_.soh = der::battery_degradation_step(*spec_.battery, battery_.soh, std::abs(r.cell_kwh), dt);
        p_batt = r.p_actual;
        ctx.write("p_battery", kObs, p_batt);
        ctx.write("soc_battery", kState, battery_.soc);
        ctx.write("soh_battery", kState, battery_.soh);
    }

    // Accounting on realized flows so that the bus balances exactly.
    const auto split = control::pv_allocation(p_pv, std::max(0.0, load), std::max(0.0, p_ev_total), std::max(0.0, p_batt));
    const double grid = load + p_ev_total + p_batt - p_pv + (spec_.grid_export ? 0.0 : split.curtailed);
    ctx.write("p_load", kObs, load);
    ctx.write("p_pv", kObs, p_pv);
    ctx.write("pv_to_building", kObs, split.to_building);
    ctx.write("pv_to_ev", kObs, split.to_ev);
    ctx.write("pv_to_battery", kObs, split.to_battery);
    ctx.write("pv_spill", kObs, split.curtailed);
    ctx.write("p_ev", kObs, p_ev_total);
    ctx.write("p_grid", kObs, grid);
    ctx.write("power", kObs, grid - load);
}

// --- controllers -----------------------------------------------------------

SinusoidReference::SinusoidReference(HierPath path, double mean, double amplitude, double period_hours)
    : Module(std::move(path), core::ModuleKind::Controller), mean_(mean), amp_(amplitude), period_(period_hours) {
    if (!(period_ > 0.0)) throw InvalidArgument("reference period must be > 0");
}

std::vector<OutputDecl> SinusoidReference::outputs() const { return {{"v_reference", kAction, Unit::KgPerSecond, 0.0}}; }

void SinusoidReference::step(StepContext& ctx) {
    const double h = static_cast<double>((ctx.clock().now() - ctx.clock().start()).count()) / 3600.0;
    ctx.write("v_reference", kAction, mean_ + amp_ * std::sin(2.0 * std::numbers::pi * h / period_));
}

TrackingController::TrackingController(HierPath path, core::SignalKey reference, control::TrackMode mode, double lo,
                                       double hi, std::vector<double> stages)
    : Module(std::move(path), core::ModuleKind::Controller),
      ref_(std::move(reference)),
      mode_(mode),
      lo_(lo),
      hi_(hi),
      stages_(std::move(stages)) {}

std::vector<InputDecl> TrackingController::inputs() const { return {{ref_, Unit::KgPerSecond, false}}; }

std::vector<OutputDecl> TrackingController::outputs() const { return {{"v_setpoint", kAction, Unit::KgPerSecond, 0.0}}; }

void TrackingController::step(StepContext& ctx) {
    ctx.write("v_setpoint", kAction, control::linear_or_staged_track(mode_, std::max(0.0, ctx.read(ref_)), lo_, hi_, stages_));
}

DeadbandHvacController::DeadbandHvacController(HierPath path, control::DeadbandConfig config, HvacCommand command,
                                               HierPath zone, std::optional<HierPath> occupancy,
                                               std::optional<core::SignalKey> curtail)
    : Module(std::move(path), core::ModuleKind::Controller),
      cfg_(config),
      cmd_(command),
      zone_(std::move(zone)),
      occupancy_(std::move(occupancy)),
      curtail_(std::move(curtail)) {
    cfg_.validate();
}

std::vector<InputDecl> DeadbandHvacController::inputs() const {
    std::vector<InputDecl> v = {in(zone_, "t_zone", kState, Unit::Celsius)};
    if (occupancy_) v.push_back(in(*occupancy_, "offset_k", kDist, Unit::Kelvin));
    if (curtail_) v.push_back({*curtail_, Unit::Fraction, false});
    return v;
}

std::vector<OutputDecl> DeadbandHvacController::outputs() const {
    return {{"t_sa_setpoint", kAction, Unit::Celsius, cmd_.t_sa_design},
            {"v_sa_setpoint", kAction, Unit::KgPerSecond, 0.0},
            {"on", kAction, Unit::Flag, 0.0},
            {"setpoint", kAction, Unit::Celsius, cfg_.setpoint}};
}

void DeadbandHvacController::step(StepContext& ctx) {
    auto cfg = cfg_;
    if (occupancy_) cfg.setpoint += ctx.read(*occupancy_, "offset_k", kDist);
    on_ = control::onoff_deadband(cfg, ctx.read(zone_, "t_zone", kState), on_);
    const double curtail = curtail_ ? std::clamp(ctx.read(*curtail_), 0.0, 1.0) : 0.0;
    ctx.write("t_sa_setpoint", kAction, cmd_.t_sa_design);
    ctx.write("v_sa_setpoint", kAction, on_ ? cmd_.v_sa_rated * (1.0 - curtail) : 0.0);
    ctx.write("on", kAction, on_ ? 1.0 : 0.0);
    ctx.write("setpoint", kAction, cfg.setpoint);
}

MpcHvacController::MpcHvacController(HierPath path, control::MpcConfig config, control::ActionBounds bounds,
                                     std::shared_ptr<const thermal::ZoneModel> model, HvacCommand command,
                                     HierPath zone, HierPath weather, HierPath occupancy, HierPath price)
    : Module(std::move(path), core::ModuleKind::Controller),
      cfg_(config),
      bounds_(bounds),
      model_(std::move(model)),
      cmd_(command),
      zone_(std::move(zone)),
      weather_(std::move(weather)),
      occupancy_(std::move(occupancy)),
      price_(std::move(price)) {
    cfg_.validate();
    bounds_.validate();
    if (!model_) throw InvalidArgument("MPC controller needs a zone model");
    initialize();
}

void MpcHvacController::initialize() {
    rh_.emplace(cfg_, bounds_);
    history_.assign(4 + model_->activity_names().size(), {});
}

std::vector<InputDecl> MpcHvacController::inputs() const {
    std::vector<InputDecl> v = {in(zone_, "t_zone", kState, Unit::Celsius), in(weather_, "t_out", kDist, Unit::Celsius),
                                in(weather_, "ghi", kDist, Unit::WattPerSquareMeter),
                                in(occupancy_, "occupants", kDist, Unit::Count),
                                in(price_, "price", kDist, Unit::UsdPerKiloWattHour)};
    for (const auto& n : model_->activity_names()) v.push_back(in(occupancy_, activity_variable(n), kDist, Unit::Flag));
    return v;
}

std::vector<OutputDecl> MpcHvacController::outputs() const {
    return {{"t_sa_setpoint", kAction, Unit::Celsius, cmd_.t_sa_design},
            {"v_sa_setpoint", kAction, Unit::KgPerSecond, 0.0},
            {"q_target", kAction, Unit::Watt, 0.0},
            {"mpc_iterations", kObs, Unit::Count, 0.0},
            {"mpc_cost", kObs, Unit::None, 0.0},
            {"mpc_grad_norm", kObs, Unit::None, 0.0}};
}

control::MpcForecast MpcHvacController::forecast(const core::SimClock& clock) const {
    const std::size_t h = cfg_.horizon;
    const auto period = static_cast<std::size_t>(clock.steps_per_day());
    std::vector<std::vector<double>> ch(history_.size());
    for (std::size_t c = 0; c < history_.size(); ++c) {
        const auto& hist = history_[c];
        ch[c].push_back(hist.back());
        if (h > 1) {
            std::vector<double> rest;
            if (hist.size() >= period) {
                rest = disturbance::SeasonalNaive(period).forecast(hist, h - 1);
            } else {
                rest.assign(h - 1, hist.back());
            }
            ch[c].insert(ch[c].end(), rest.begin(), rest.end());
        }
    }
    control::MpcForecast f;
    for (std::size_t k = 0; k < h; ++k) {
        thermal::Exogenous x{ch[0][k], std::max(0.0, ch[1][k]), ch[2][k], {}};
        for (std::size_t a = 4; a < ch.size(); ++a) x.activity.push_back(ch[a][k]);
        f.exogenous.push_back(std::move(x));
        f.price.push_back(ch[3][k]);
    }
    return f;
}

void MpcHvacController::step(StepContext& ctx) {
    const auto& clock = ctx.clock();
    if (std::abs(model_->dt() - static_cast<double>(clock.dt_seconds())) > 1e-9) {
        throw RuntimeError("MPC model step differs from the clock step");
    }
    std::vector<double> now = {ctx.read(weather_, "t_out", kDist), ctx.read(weather_, "ghi", kDist),
                               ctx.read(occupancy_, "occupants", kDist), ctx.read(price_, "price", kDist)};
    for (const auto& n : model_->activity_names()) now.push_back(ctx.read(occupancy_, activity_variable(n), kDist));
    const auto keep = static_cast<std::size_t>(2 * clock.steps_per_day());
    for (std::size_t c = 0; c < history_.size(); ++c) {
        history_[c].push_back(now[c]);
        if (history_[c].size() > keep) history_[c].erase(history_[c].begin());
    }

    const double t_zone = ctx.read(zone_, "t_zone", kState);
    const auto r = rh_->solve(*model_, t_zone, forecast(clock));
    const double q = r.q.front();
    double v = 0.0;
    double t_sa = cmd_.t_sa_design;
    if (std::abs(q) >= 1.0) {
        v = cmd_.v_sa_rated;
        t_sa = t_zone + q / (v * hvac::kCpAir);
        t_sa = q < 0.0 ? std::clamp(t_sa, cmd_.t_sa_design, t_zone) : std::max(t_sa, t_zone);
    }
    ctx.write("t_sa_setpoint", kAction, t_sa);
    ctx.write("v_sa_setpoint", kAction, v);
    ctx.write("q_target", kAction, q);
    ctx.write("mpc_iterations", kObs, r.iterations);
    ctx.write("mpc_cost", kObs, r.cost);
    ctx.write("mpc_grad_norm", kObs, r.grad_norm);
}

PidTankController::PidTankController(HierPath path, control::PidConfig config, double setpoint, HierPath tank)
    : Module(std::move(path), core::ModuleKind::Controller), cfg_(config), setpoint_(setpoint), tank_(std::move(tank)) {
    cfg_.validate();
}

std::vector<InputDecl> PidTankController::inputs() const { return {in(tank_, "t_tank", kState, Unit::Celsius)}; }

std::vector<OutputDecl> PidTankController::outputs() const { return {{"heater", kAction, Unit::Fraction, 0.0}}; }

void PidTankController::step(StepContext& ctx) {
    const double e = setpoint_ - ctx.read(tank_, "t_tank", kState);
    const auto r = control::pid_step(cfg_, state_, e, static_cast<double>(ctx.clock().dt_seconds()));
    state_ = r.next;
    ctx.write("heater", kAction, r.u);
}

TouDispatchController::TouDispatchController(HierPath path, control::TouDispatchConfig config,
                                             control::StorageView battery, HierPath der, HierPath price)
    : Module(std::move(path), core::ModuleKind::Controller),
      cfg_(config),
      battery_(battery),
      der_(std::move(der)),
      price_(std::move(price)) {
    cfg_.validate();
}

std::vector<InputDecl> TouDispatchController::inputs() const {
    return {in(der_, "soc_battery", kState, Unit::Fraction), in(der_, "soh_battery", kState, Unit::Fraction),
            in(der_, "p_load", kObs, Unit::Watt), in(der_, "pv_to_building", kObs, Unit::Watt),
            in(price_, "is_peak", kDist, Unit::Flag)};
}

std::vector<OutputDecl> TouDispatchController::outputs() const {
    return {{"p_battery_request", kAction, Unit::Watt, 0.0}};
}

void TouDispatchController::step(StepContext& ctx) {
    const double soc = ctx.read(der_, "soc_battery", kState);
    auto view = battery_;
    view.usable_kwh *= ctx.read(der_, "soh_battery", kState);
    const double unmet = std::max(0.0, ctx.read(der_, "p_load", kObs) - ctx.read(der_, "pv_to_building", kObs));
    const bool peak = ctx.read(price_, "is_peak", kDist) > 0.5;
    ctx.write("p_battery_request", kAction,
              control::tou_battery_dispatch(cfg_, peak, soc, unmet, view, static_cast<double>(ctx.clock().dt_seconds())));
}

PeakCoordinatorModule::PeakCoordinatorModule(HierPath path, double cap, std::vector<HierPath> buildings)
    : Module(std::move(path), core::ModuleKind::Controller), cap_(cap), buildings_(std::move(buildings)) {
    if (!(cap_ > 0.0)) throw InvalidArgument("peak cap must be > 0");
    for (const auto& b : buildings_) {
        if (!b.system() || b.component()) throw InvalidArgument("peak coordinator targets must be building paths");
    }
}

std::string PeakCoordinatorModule::curtail_variable(const HierPath& building) { return "curtail_" + *building.system(); }

std::vector<InputDecl> PeakCoordinatorModule::inputs() const {
    std::vector<InputDecl> v;
    for (const auto& b : buildings_) v.push_back(in(b, "power", kObs, Unit::Watt));
    return v;
}

std::vector<OutputDecl> PeakCoordinatorModule::outputs() const {
    std::vector<OutputDecl> v;
    for (const auto& b : buildings_) v.push_back({curtail_variable(b), kAction, Unit::Fraction, 0.0});
    return v;
}

void PeakCoordinatorModule::step(StepContext& ctx) {
    std::vector<double> loads;
    for (const auto& b : buildings_) loads.push_back(std::max(0.0, ctx.read(b, "power", kObs)));
    const auto r = control::cluster_peak_coordinator(loads, cap_);
    for (std::size_t i = 0; i < buildings_.size(); ++i) {
        ctx.write(curtail_variable(buildings_[i]), kAction, r.fractions[i]);
    }
}

} // namespace bldgsim::sim
