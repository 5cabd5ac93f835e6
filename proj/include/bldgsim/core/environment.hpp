#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bldgsim/core/clock.hpp"
#include "bldgsim/core/module.hpp"
#include "bldgsim/core/signal.hpp"

namespace bldgsim::core {

enum class AggregationFn { Sum, Mean };

/// Bottom-up aggregation published at `target` after the dynamics step.
/// Only leaf (non-aggregated) entries inside target's subtree are combined.
struct AggregationRule {
    HierPath target;
    std::string variable;
    AggregationFn fn = AggregationFn::Sum;
    DataKind source_kind = DataKind::Observation;
    Unit unit = Unit::Watt;
};

struct WiringViolation {
    enum class Kind { UpwardAction, ObservationOutOfScope, UnresolvedInput, UnitMismatch, ActionCycle };
    Kind kind;
    HierPath consumer;
    SignalKey key;
    std::string message;
};

std::string_view to_string(WiringViolation::Kind kind);

struct ActionEdge {
    HierPath producer;
    HierPath consumer;
};

/// Combines leaf entries of `frame` under `prefix`. Throws RuntimeError when
/// nothing matches.
double aggregate(const SignalFrame& frame, const HierPath& prefix, const std::string& variable,
                 DataKind kind, AggregationFn fn = AggregationFn::Sum);

/// Splits `total` proportionally to `weights`; the parts sum to total.
std::vector<double> disaggregate(double total, std::span<const double> weights);

/// Module registry plus the deterministic step loop:
/// disturbances, controllers top-down, dynamics in dependency order,
/// then observation aggregation.
class Environment {
public:
    explicit Environment(SimClock clock);
    ~Environment();

    Environment(const Environment&) = delete;
    Environment& operator=(const Environment&) = delete;

    /// Throws RuntimeError on duplicate path or after initialize().
    Module& register_module(std::unique_ptr<Module> module);

    template <class M, class... Args>
    M& emplace(Args&&... args) {
        auto m = std::make_unique<M>(std::forward<Args>(args)...);
        M& ref = *m;
        register_module(std::move(m));
        return ref;
    }

    void add_aggregation(AggregationRule rule);

    std::vector<WiringViolation> validate_wiring() const;
    std::vector<ActionEdge> action_edges() const;

    /// Validates wiring (throws RuntimeError listing violations), fixes the
    /// execution order and initializes every module.
    void initialize();
    bool initialized() const noexcept { return initialized_; }

    /// Runs one step and returns the completed frame; advances the clock.
    const SignalFrame& step();

    /// Returns every module to its post-initialize state and rewinds the clock.
    void reset();

    const SimClock& clock() const noexcept { return clock_; }
    /// Frame of the most recent step; before the first step, initial values.
    const SignalFrame& last_frame() const noexcept { return previous_; }

    double aggregate(const HierPath& prefix, const std::string& variable, DataKind kind,
                     AggregationFn fn = AggregationFn::Sum) const;
    /// Splits `total` over the leaf entries under `prefix` (sorted by path)
    /// using one weight per entry.
    std::map<SignalKey, double> disaggregate(const HierPath& prefix, const std::string& variable,
                                             DataKind kind, double total,
                                             std::span<const double> weights) const;

    const Module* find(const HierPath& path) const;
    std::vector<ModuleHandle> handles() const;
    std::vector<const Module*> execution_order() const;
    const std::vector<AggregationRule>& aggregations() const noexcept { return aggregations_; }

private:
    class Context;

    struct Producer {
        const Module* module = nullptr;   // null for aggregation rules
        Unit unit = Unit::None;
        double initial = 0.0;
    };

    std::map<SignalKey, Producer> producers() const;
    void compute_order();
    SignalFrame initial_frame() const;

    struct ModuleIo {
        std::map<SignalKey, InputDecl> inputs;
        std::map<std::pair<std::string, DataKind>, Unit> outputs;
    };

    SimClock clock_;
    std::map<const Module*, ModuleIo> io_;
    std::vector<std::unique_ptr<Module>> modules_;
    std::map<HierPath, std::size_t> index_;
    std::vector<AggregationRule> aggregations_;
    std::vector<Module*> disturbances_;
    std::vector<Module*> controllers_;
    std::vector<Module*> dynamics_;
    SignalFrame previous_;
    bool initialized_ = false;
};

} // namespace bldgsim::core
