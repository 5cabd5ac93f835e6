#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "bldgsim/core/hier_path.hpp"

namespace bldgsim::core {

enum class DataKind { State, Action, Disturbance, Observation };

std::string_view to_string(DataKind kind);
DataKind parse_data_kind(std::string_view text);

// Unit annotations are checked when wiring; only degC <-> K is converted.
enum class Unit {
    None,
    Watt,
    Celsius,
    Kelvin,
    KgPerSecond,
    KiloWattHour,
    Fraction,
    WattPerSquareMeter,
    UsdPerKiloWattHour,
    Count,
    Flag,
};

std::string_view to_string(Unit unit);

/// True when a value published in `produced` may be read as `expected`.
bool units_compatible(Unit produced, Unit expected);

/// Converts between compatible units (identity except degC <-> K).
double convert_unit(double value, Unit from, Unit to);

struct SignalKey {
    HierPath path;
    std::string variable;
    DataKind kind = DataKind::State;

    auto operator<=>(const SignalKey&) const = default;
    bool operator==(const SignalKey&) const = default;

    // cluster.domain.system.component.variable.kind
    std::string column_name() const;
    std::string str() const;
};

struct SignalEntry {
    double value = 0.0;
    Unit unit = Unit::None;
    bool aggregated = false;   // produced by a bottom-up aggregation rule
};

/// One timestep's keyed values. Keys are unique and values finite.
class SignalFrame {
public:
    explicit SignalFrame(std::int64_t timestep = 0);

    std::int64_t timestep() const noexcept { return timestep_; }

    /// Throws RuntimeError on a duplicate key or a non-finite value.
    void insert(const SignalKey& key, SignalEntry entry);
    /// Inserts or replaces.
    void set(const SignalKey& key, SignalEntry entry);

    bool contains(const SignalKey& key) const { return entries_.count(key) != 0; }
    const SignalEntry* find(const SignalKey& key) const;
    double value(const SignalKey& key) const;   // throws when missing

    const std::map<SignalKey, SignalEntry>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::int64_t timestep_;
    std::map<SignalKey, SignalEntry> entries_;
};

} // namespace bldgsim::core
