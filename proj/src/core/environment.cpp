#include "bldgsim/core/environment.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <set>

#include "bldgsim/core/error.hpp"

namespace bldgsim::core {

std::string_view to_string(ModuleKind kind) {
    switch (kind) {
    case ModuleKind::DynamicStateful: return "dynamic-stateful";
    case ModuleKind::DynamicStateless: return "dynamic-stateless";
    case ModuleKind::Controller: return "controller";
    case ModuleKind::Disturbance: return "disturbance";
    }
    return "?";
}

std::string_view to_string(WiringViolation::Kind kind) {
    using K = WiringViolation::Kind;
    switch (kind) {
    case K::UpwardAction: return "upward-action";
    case K::ObservationOutOfScope: return "observation-out-of-scope";
    case K::UnresolvedInput: return "unresolved-input";
    case K::UnitMismatch: return "unit-mismatch";
    case K::ActionCycle: return "action-cycle";
    }
    return "?";
}

double aggregate(const SignalFrame& frame, const HierPath& prefix, const std::string& variable,
                 DataKind kind, AggregationFn fn) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [key, entry] : frame.entries()) {
        if (entry.aggregated || key.kind != kind || key.variable != variable) continue;
        if (!prefix.contains(key.path)) continue;
        sum += entry.value;
        ++count;
    }
    if (count == 0) {
        throw RuntimeError("aggregate: no '" + variable + "' entries under " + prefix.str());
    }
    return fn == AggregationFn::Mean ? sum / static_cast<double>(count) : sum;
}

std::vector<double> disaggregate(double total, std::span<const double> weights) {
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("disaggregate: weights must be finite and >= 0");
        wsum += w;
    }
    if (weights.empty() || wsum <= 0.0) throw InvalidArgument("disaggregate: weights must have a positive sum");
    std::vector<double> parts;
    parts.reserve(weights.size());
    for (double w : weights) parts.push_back(total * w / wsum);
    return parts;
}

class Environment::Context final : public StepContext {
public:
    Context(const Environment& env, const Module& module, SignalFrame& frame,
            const std::map<SignalKey, InputDecl>& inputs, const std::map<std::pair<std::string, DataKind>, Unit>& outputs)
        : env_(env), module_(module), frame_(frame), inputs_(inputs), outputs_(outputs) {}

    double read(const SignalKey& key) const override {
        auto decl = inputs_.find(key);
        if (decl == inputs_.end()) {
            throw RuntimeError(module_.path().str() + " read undeclared input " + key.str());
        }
        const SignalEntry* e = decl->second.lagged ? nullptr : frame_.find(key);
        if (!e) e = env_.previous_.find(key);
        if (!e) throw RuntimeError("unresolved input " + key.column_name() + " for " + module_.path().str());
        if (decl->second.unit == Unit::None || e->unit == Unit::None) return e->value;
        return convert_unit(e->value, e->unit, decl->second.unit);
    }

    void write(const std::string& variable, DataKind kind, double value) override {
        auto it = outputs_.find({variable, kind});
        if (it == outputs_.end()) {
            throw RuntimeError(module_.path().str() + " wrote undeclared output " + variable);
        }
        if (!std::isfinite(value)) {
            throw RuntimeError("non-finite value produced by " + module_.path().str() + " for '" +
                               variable + "' at step " + std::to_string(env_.clock_.step()));
        }
        frame_.set(SignalKey{module_.path(), variable, kind}, SignalEntry{value, it->second, false});
    }

    const SimClock& clock() const override { return env_.clock_; }

private:
    const Environment& env_;
    const Module& module_;
    SignalFrame& frame_;
    const std::map<SignalKey, InputDecl>& inputs_;
    const std::map<std::pair<std::string, DataKind>, Unit>& outputs_;
};

Environment::Environment(SimClock clock) : clock_(clock) {}
Environment::~Environment() = default;

Module& Environment::register_module(std::unique_ptr<Module> module) {
    if (!module) throw InvalidArgument("register_module: null module");
    if (initialized_) throw RuntimeError("register_module: environment already initialized");
    const HierPath& path = module->path();
    if (index_.count(path)) throw RuntimeError("duplicate path " + path.str());
    index_.emplace(path, modules_.size());
    modules_.push_back(std::move(module));
    return *modules_.back();
}

void Environment::add_aggregation(AggregationRule rule) {
    if (initialized_) throw RuntimeError("add_aggregation: environment already initialized");
    aggregations_.push_back(std::move(rule));
}

const Module* Environment::find(const HierPath& path) const {
    auto it = index_.find(path);
    return it == index_.end() ? nullptr : modules_[it->second].get();
}

std::vector<ModuleHandle> Environment::handles() const {
    std::vector<ModuleHandle> out;
    for (const auto& m : modules_) out.push_back(m->handle());
    return out;
}

std::map<SignalKey, Environment::Producer> Environment::producers() const {
    std::map<SignalKey, Producer> out;
    for (const auto& m : modules_) {
        for (const auto& o : m->outputs()) {
            out[SignalKey{m->path(), o.variable, o.kind}] = Producer{m.get(), o.unit, o.initial};
        }
    }
    for (const auto& rule : aggregations_) {
        out[SignalKey{rule.target, rule.variable, DataKind::Observation}] = Producer{nullptr, rule.unit, 0.0};
    }
    return out;
}

std::vector<ActionEdge> Environment::action_edges() const {
    auto prod = producers();
    std::vector<ActionEdge> edges;
    for (const auto& m : modules_) {
        for (const auto& in : m->inputs()) {
            if (in.key.kind != DataKind::Action) continue;
            auto it = prod.find(in.key);
            if (it == prod.end() || !it->second.module) continue;
            edges.push_back({it->second.module->path(), m->path()});
        }
    }
    return edges;
}

std::vector<WiringViolation> Environment::validate_wiring() const {
    using K = WiringViolation::Kind;
    std::vector<WiringViolation> out;
    auto prod = producers();

    for (const auto& m : modules_) {
        for (const auto& in : m->inputs()) {
            auto it = prod.find(in.key);
            if (it == prod.end()) {
                out.push_back({K::UnresolvedInput, m->path(), in.key,
                               "unresolved input " + in.key.column_name() + " for " + m->path().str()});
                continue;
            }
            if (in.unit != Unit::None && it->second.unit != Unit::None &&
                !units_compatible(it->second.unit, in.unit)) {
                out.push_back({K::UnitMismatch, m->path(), in.key,
                               m->path().str() + " expects " + std::string(to_string(in.unit)) + " for " +
                                   in.key.str() + ", producer publishes " +
                                   std::string(to_string(it->second.unit))});
            }
            if (in.key.kind == DataKind::Action && it->second.module) {
                const HierPath& producer = it->second.module->path();
                if (static_cast<int>(m->path().level()) > static_cast<int>(producer.level())) {
                    out.push_back({K::UpwardAction, m->path(), in.key,
                                   "action " + in.key.str() + " flows from " +
                                       std::string(to_string(producer.level())) + " level " + producer.str() +
                                       " up to " + std::string(to_string(m->path().level())) + " level " +
                                       m->path().str()});
                }
            }
            if (m->kind() == ModuleKind::Controller &&
                (in.key.kind == DataKind::State || in.key.kind == DataKind::Observation) &&
                !m->path().contains(in.key.path)) {
                out.push_back({K::ObservationOutOfScope, m->path(), in.key,
                               "controller " + m->path().str() + " reads " + in.key.str() +
                                   " outside its subtree"});
            }
        }
    }

    // Same-level action edges must be acyclic.
    std::map<HierPath, std::set<HierPath>> succ;
    for (const auto& e : action_edges()) {
        if (e.producer.level() == e.consumer.level() && e.producer != e.consumer) {
            succ[e.producer].insert(e.consumer);
        }
    }
    std::map<HierPath, int> color;   // 0 new, 1 on stack, 2 done
    std::function<bool(const HierPath&)> dfs = [&](const HierPath& p) {
        color[p] = 1;
        for (const auto& q : succ[p]) {
            if (color[q] == 1) return true;
            if (color[q] == 0 && dfs(q)) return true;
        }
        color[p] = 2;
        return false;
    };
    for (const auto& [p, _] : succ) {
        if (color[p] == 0 && dfs(p)) {
            out.push_back({K::ActionCycle, p, SignalKey{p, "", DataKind::Action},
                           "cycle among same-level action edges through " + p.str()});
            break;
        }
    }
    return out;
}

namespace {

// Kahn's algorithm; ties and cycle breaks resolved by registration order.
std::vector<std::size_t> stable_topo(std::size_t n, const std::vector<std::set<std::size_t>>& preds) {
    std::vector<std::size_t> order;
    std::vector<bool> done(n, false);
    while (order.size() < n) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n && pick == n; ++i) {
            if (done[i]) continue;
            bool ready = std::all_of(preds[i].begin(), preds[i].end(), [&](std::size_t p) { return done[p]; });
            if (ready) pick = i;
        }
        if (pick == n) {
            // cycle: the earliest remaining module consumes previous-step values
            for (std::size_t i = 0; i < n; ++i) {
                if (!done[i]) {
                    pick = i;
                    break;
                }
            }
        }
        done[pick] = true;
        order.push_back(pick);
    }
    return order;
}

} // namespace

void Environment::compute_order() {
    disturbances_.clear();
    controllers_.clear();
    dynamics_.clear();
    std::vector<Module*> ctrl, dyn;
    for (const auto& m : modules_) {
        if (m->kind() == ModuleKind::Disturbance) disturbances_.push_back(m.get());
        else if (m->kind() == ModuleKind::Controller) ctrl.push_back(m.get());
        else dyn.push_back(m.get());
    }

    auto prod = producers();
    auto local_index = [](const std::vector<Module*>& v) {
        std::map<const Module*, std::size_t> idx;
        for (std::size_t i = 0; i < v.size(); ++i) idx[v[i]] = i;
        return idx;
    };

    // Controllers: top-down by level, then by same-level action dependencies.
    std::stable_sort(ctrl.begin(), ctrl.end(), [](const Module* a, const Module* b) {
        return static_cast<int>(a->path().level()) > static_cast<int>(b->path().level());
    });
    {
        auto idx = local_index(ctrl);
        std::vector<std::set<std::size_t>> preds(ctrl.size());
        for (std::size_t i = 0; i < ctrl.size(); ++i) {
            for (const auto& in : ctrl[i]->inputs()) {
                if (in.key.kind != DataKind::Action || in.lagged) continue;
                auto it = prod.find(in.key);
                if (it == prod.end() || !it->second.module) continue;
                auto j = idx.find(it->second.module);
                if (j != idx.end() && j->second != i &&
                    ctrl[j->second]->path().level() == ctrl[i]->path().level()) {
                    preds[i].insert(j->second);
                }
            }
        }
        // Level blocks stay in place: sort within each block.
        std::size_t begin = 0;
        while (begin < ctrl.size()) {
            std::size_t end = begin;
            while (end < ctrl.size() && ctrl[end]->path().level() == ctrl[begin]->path().level()) ++end;
            std::size_t n = end - begin;
            std::vector<std::set<std::size_t>> block(n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t p : preds[begin + i]) {
                    if (p >= begin && p < end) block[i].insert(p - begin);
                }
            }
            for (std::size_t k : stable_topo(n, block)) controllers_.push_back(ctrl[begin + k]);
            begin = end;
        }
    }

    // Dynamics: topological over non-lagged data dependencies.
    {
        auto idx = local_index(dyn);
        std::vector<std::set<std::size_t>> preds(dyn.size());
        for (std::size_t i = 0; i < dyn.size(); ++i) {
            for (const auto& in : dyn[i]->inputs()) {
                if (in.lagged || in.key.kind == DataKind::Action || in.key.kind == DataKind::Disturbance) continue;
                auto it = prod.find(in.key);
                if (it == prod.end() || !it->second.module) continue;
                auto j = idx.find(it->second.module);
                if (j != idx.end() && j->second != i) preds[i].insert(j->second);
            }
        }
        for (std::size_t k : stable_topo(dyn.size(), preds)) dynamics_.push_back(dyn[k]);
    }
}

std::vector<const Module*> Environment::execution_order() const {
    std::vector<const Module*> out;
    for (auto* group : {&disturbances_, &controllers_, &dynamics_}) {
        out.insert(out.end(), group->begin(), group->end());
    }
    return out;
}

SignalFrame Environment::initial_frame() const {
    SignalFrame f(0);
    for (const auto& m : modules_) {
        for (const auto& o : m->outputs()) {
            f.set(SignalKey{m->path(), o.variable, o.kind}, SignalEntry{o.initial, o.unit, false});
        }
    }
    for (const auto& rule : aggregations_) {
        SignalKey key{rule.target, rule.variable, DataKind::Observation};
        double v = 0.0;
        try {
            v = core::aggregate(f, rule.target, rule.variable, rule.source_kind, rule.fn);
        } catch (const RuntimeError&) {
        }
        f.set(key, SignalEntry{v, rule.unit, true});
    }
    return f;
}

void Environment::initialize() {
    auto violations = validate_wiring();
    if (!violations.empty()) {
        std::string msg = "wiring invalid:";
        for (const auto& v : violations) msg += "\n  " + v.message;
        throw RuntimeError(msg);
    }
    compute_order();
    io_.clear();
    for (auto& m : modules_) {
        auto& io = io_[m.get()];
        for (auto& in : m->inputs()) io.inputs.emplace(in.key, in);
        for (auto& o : m->outputs()) io.outputs.emplace(std::make_pair(o.variable, o.kind), o.unit);
    }
    for (auto& m : modules_) m->initialize();
    clock_.reset();
    previous_ = initial_frame();
    initialized_ = true;
}

void Environment::reset() {
    if (!initialized_) throw RuntimeError("reset: environment not initialized");
    for (auto& m : modules_) m->reset();
    clock_.reset();
    previous_ = initial_frame();
}

const SignalFrame& Environment::step() {
    if (!initialized_) throw RuntimeError("step: environment not initialized");
    SignalFrame frame(clock_.step());

    auto run = [&](Module* m) {
        const auto& io = io_.at(m);
        Context ctx(*this, *m, frame, io.inputs, io.outputs);
        try {
            m->step(ctx);
        } catch (const Error& e) {
            throw RuntimeError("step " + std::to_string(clock_.step()) + ", " + m->path().str() + ": " + e.what());
        }
    };
    for (Module* m : disturbances_) run(m);
    for (Module* m : controllers_) run(m);
    for (Module* m : dynamics_) run(m);

    // Outputs a module did not publish this step hold their previous value.
    for (const auto& [key, entry] : previous_.entries()) {
        if (!entry.aggregated && !frame.contains(key)) frame.set(key, entry);
    }
    for (const auto& rule : aggregations_) {
        double v = core::aggregate(frame, rule.target, rule.variable, rule.source_kind, rule.fn);
        frame.set(SignalKey{rule.target, rule.variable, DataKind::Observation}, SignalEntry{v, rule.unit, true});
    }

    previous_ = std::move(frame);
    clock_.advance();
    return previous_;
}

double Environment::aggregate(const HierPath& prefix, const std::string& variable, DataKind kind,
                              AggregationFn fn) const {
    return core::aggregate(previous_, prefix, variable, kind, fn);
}

std::map<SignalKey, double> Environment::disaggregate(const HierPath& prefix, const std::string& variable,
                                                      DataKind kind, double total,
                                                      std::span<const double> weights) const {
    std::vector<SignalKey> children;
    for (const auto& [key, entry] : previous_.entries()) {
        if (!entry.aggregated && key.kind == kind && key.variable == variable && prefix.contains(key.path)) {
            children.push_back(key);
        }
    }
    if (children.size() != weights.size()) {
        throw InvalidArgument("disaggregate: " + std::to_string(weights.size()) + " weights for " +
                              std::to_string(children.size()) + " children under " + prefix.str());
    }
    auto parts = core::disaggregate(total, weights);
    std::map<SignalKey, double> out;
    for (std::size_t i = 0; i < children.size(); ++i) out.emplace(children[i], parts[i]);
    return out;
}

} // namespace bldgsim::core
