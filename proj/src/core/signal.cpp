#include "bldgsim/core/signal.hpp"

#include <cmath>

#include "bldgsim/core/error.hpp"

namespace bldgsim::core {

std::string_view to_string(DataKind kind) {
    switch (kind) {
    case DataKind::State: return "state";
    case DataKind::Action: return "action";
    case DataKind::Disturbance: return "disturbance";
    case DataKind::Observation: return "observation";
    }
    return "?";
}

DataKind parse_data_kind(std::string_view text) {
    if (text == "state") return DataKind::State;
    if (text == "action") return DataKind::Action;
    if (text == "disturbance") return DataKind::Disturbance;
    if (text == "observation") return DataKind::Observation;
    throw InvalidArgument("unknown data kind '" + std::string(text) + "'");
}

std::string_view to_string(Unit unit) {
    switch (unit) {
    case Unit::None: return "-";
    case Unit::Watt: return "W";
    case Unit::Celsius: return "degC";
    case Unit::Kelvin: return "K";
    case Unit::KgPerSecond: return "kg/s";
    case Unit::KiloWattHour: return "kWh";
    case Unit::Fraction: return "fraction";
    case Unit::WattPerSquareMeter: return "W/m2";
    case Unit::UsdPerKiloWattHour: return "usd/kWh";
    case Unit::Count: return "count";
    case Unit::Flag: return "flag";
    }
    return "?";
}

bool units_compatible(Unit produced, Unit expected) {
    if (produced == expected) return true;
    auto temperature = [](Unit u) { return u == Unit::Celsius || u == Unit::Kelvin; };
    return temperature(produced) && temperature(expected);
}

double convert_unit(double value, Unit from, Unit to) {
    if (from == to) return value;
    if (from == Unit::Celsius && to == Unit::Kelvin) return value + 273.15;
    if (from == Unit::Kelvin && to == Unit::Celsius) return value - 273.15;
    throw InvalidArgument("cannot convert " + std::string(to_string(from)) + " to " +
                          std::string(to_string(to)));
}

std::string SignalKey::column_name() const {
    return path.dotted() + "." + variable + "." + std::string(to_string(kind));
}

std::string SignalKey::str() const {
    return path.str() + ":" + variable + ":" + std::string(to_string(kind));
}

SignalFrame::SignalFrame(std::int64_t timestep) : timestep_(timestep) {
    if (timestep < 0) throw InvalidArgument("frame timestep must be >= 0");
}

void SignalFrame::insert(const SignalKey& key, SignalEntry entry) {
    if (!std::isfinite(entry.value)) {
        throw RuntimeError("non-finite value for " + key.str());
    }
    auto [it, inserted] = entries_.emplace(key, entry);
    if (!inserted) throw RuntimeError("duplicate key " + key.str());
}

void SignalFrame::set(const SignalKey& key, SignalEntry entry) {
    if (!std::isfinite(entry.value)) {
        throw RuntimeError("non-finite value for " + key.str());
    }
    entries_[key] = entry;
}

const SignalEntry* SignalFrame::find(const SignalKey& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

double SignalFrame::value(const SignalKey& key) const {
    const auto* e = find(key);
    if (!e) throw RuntimeError("no entry " + key.str());
    return e->value;
}

} // namespace bldgsim::core
