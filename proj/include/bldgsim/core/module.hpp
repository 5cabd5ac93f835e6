#pragma once

#include <string>
#include <vector>

#include "bldgsim/core/clock.hpp"
#include "bldgsim/core/hier_path.hpp"
#include "bldgsim/core/signal.hpp"

namespace bldgsim::core {

enum class ModuleKind { DynamicStateful, DynamicStateless, Controller, Disturbance };

std::string_view to_string(ModuleKind kind);

inline bool is_dynamic(ModuleKind kind) {
    return kind == ModuleKind::DynamicStateful || kind == ModuleKind::DynamicStateless;
}

struct InputDecl {
    SignalKey key;
    Unit unit = Unit::None;
    // Read the producer's value from the previous step. Lagged inputs do not
    // create ordering edges between dynamic modules.
    bool lagged = false;
};

struct OutputDecl {
    std::string variable;
    DataKind kind = DataKind::State;
    Unit unit = Unit::None;
    double initial = 0.0;   // value visible to lagged readers before step 0
};

struct ModuleHandle {
    HierPath path;
    ModuleKind kind = ModuleKind::DynamicStateless;
    std::vector<InputDecl> inputs;
    std::vector<OutputDecl> outputs;
};

class StepContext;

/// Base class for everything the environment steps.
class Module {
public:
    Module(HierPath path, ModuleKind kind) : path_(std::move(path)), kind_(kind) {}
    virtual ~Module() = default;

    Module(const Module&) = delete;
    Module& operator=(const Module&) = delete;

    const HierPath& path() const noexcept { return path_; }
    ModuleKind kind() const noexcept { return kind_; }

    virtual std::vector<InputDecl> inputs() const = 0;
    virtual std::vector<OutputDecl> outputs() const = 0;

    virtual void initialize() {}
    virtual void reset() { initialize(); }
    virtual void step(StepContext& ctx) = 0;

    ModuleHandle handle() const { return {path_, kind_, inputs(), outputs()}; }

protected:
    SignalKey own(std::string variable, DataKind kind) const { return {path_, std::move(variable), kind}; }

private:
    HierPath path_;
    ModuleKind kind_;
};

/// View of the bus handed to a module while it steps.
class StepContext {
public:
    virtual ~StepContext() = default;

    /// Current-step value if already produced, previous-step value otherwise.
    /// Lagged inputs always resolve to the previous step. Throws RuntimeError
    /// naming the key when it cannot be resolved.
    virtual double read(const SignalKey& key) const = 0;
    double read(const HierPath& path, const std::string& variable, DataKind kind) const {
        return read(SignalKey{path, variable, kind});
    }

    /// Publishes one of the module's declared outputs.
    virtual void write(const std::string& variable, DataKind kind, double value) = 0;

    virtual const SimClock& clock() const = 0;
};

} // namespace bldgsim::core
