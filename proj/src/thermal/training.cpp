#include "bldgsim/thermal/training.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "bldgsim/autodiff/descent.hpp"
#include "bldgsim/core/error.hpp"

namespace bldgsim::thermal {

namespace {

struct LossGraph {
    ad::Tape tape;
    ad::Var loss;
    std::size_t windows = 0;
};

std::size_t effective_stride(const TrainConfig& c) { return c.stride == 0 ? c.horizon : c.stride; }

std::unique_ptr<LossGraph> build_loss(const ZoneModel& model, const ThermalTrace& trace, const TrainConfig& cfg) {
    if (cfg.horizon < 1) throw InvalidArgument("training horizon must be >= 1");
    if (trace.size() < 2 * cfg.horizon) {
        throw InvalidArgument("trace too short: " + std::to_string(trace.size()) + " steps, need >= 2H = " +
                              std::to_string(2 * cfg.horizon));
    }
    if (trace.activity_names != model.activity_names()) {
        throw InvalidArgument("trace activities do not match the model");
    }
    if (!(cfg.physics_weight >= 0.0)) throw InvalidArgument("physics weight must be >= 0");

    auto g = std::make_unique<LossGraph>();
    g->tape = ad::Tape(model.params());
    ad::Tape& tape = g->tape;
    std::vector<ad::Var> p;
    p.reserve(model.params().size());
    for (std::size_t i = 0; i < model.params().size(); ++i) p.push_back(tape.param(i));

    const bool penalize = cfg.physics_weight > 0.0;
    ad::Var sse = tape.constant(0.0);
    ad::Var pen = tape.constant(0.0);
    std::size_t points = 0;
    const std::size_t stride = effective_stride(cfg);
    const auto exo = exogenous_series(trace, 0, trace.size());
    for (std::size_t s = 0; s + cfg.horizon < trace.size(); s += stride) {
        ad::Var t = tape.constant(trace.t_zone[s]);
        for (std::size_t k = 0; k < cfg.horizon; ++k) {
            const std::size_t i = s + k;
            t = model.step(p, t, exo[i], tape.constant(trace.q_hvac[i]), penalize ? &pen : nullptr);
            ad::Var e = t - trace.t_zone[i + 1];
            sse = sse + e * e;
            ++points;
        }
        ++g->windows;
    }
    ad::Var loss = sse * (1.0 / static_cast<double>(points));
    if (penalize) loss = loss + pen * (cfg.physics_weight / static_cast<double>(points));
    g->loss = loss;
    return g;
}

} // namespace

ThermalTrace generate_rc_trace(const RcZoneSpec& spec, const RcTraceConfig& cfg) {
    spec.validate();
    cfg.weather.validate();
    cfg.occupancy.validate();
    if (!(cfg.dt > 0.0) || std::fmod(86400.0, cfg.dt) != 0.0) throw InvalidArgument("dt must divide one day");

    ThermalTrace tr;
    tr.dt = cfg.dt;
    for (const auto& a : cfg.occupancy.activities) tr.activity_names.push_back(a.name);
    tr.activity.resize(tr.activity_names.size());

    core::SimClock clock(cfg.start, static_cast<std::int64_t>(cfg.dt));
    const auto per_day = static_cast<std::size_t>(clock.steps_per_day());
    double t = cfg.initial_t;
    bool on = false;
    for (std::size_t d = 0; d < cfg.days; ++d) {
        disturbance::SynthWeatherParams w = cfg.weather;
        const auto di = static_cast<std::int64_t>(d);
        w.t_mean += cfg.t_mean_jitter * (2.0 * disturbance::keyed_uniform(cfg.seed, di, 1, 0) - 1.0);
        w.ghi_peak *= 1.0 - cfg.cloud_jitter * disturbance::keyed_uniform(cfg.seed, di, 2, 0);
        for (std::size_t k = 0; k < per_day; ++k, clock.advance()) {
            const auto wx = disturbance::synth_weather(w, clock);
            const auto occ = disturbance::synth_occupancy(cfg.occupancy, clock);
            std::vector<double> act;
            for (const auto& name : tr.activity_names) act.push_back(occ.activity.at(name) ? 1.0 : 0.0);

            double q = 0.0;
            switch (cfg.policy) {
            case HvacPolicy::Off: break;
            case HvacPolicy::Deadband:
                if (t > cfg.setpoint + cfg.half_band) on = true;
                else if (t < cfg.setpoint - cfg.half_band) on = false;
                q = on ? -cfg.q_cool : 0.0;
                break;
            case HvacPolicy::Proportional: q = -std::max(0.0, cfg.kp * (t - cfg.setpoint)); break;
            }

            tr.t_zone.push_back(t);
            tr.t_out.push_back(wx.t_out);
            tr.ghi.push_back(wx.ghi);
            tr.occupancy.push_back(occ.occupants);
            tr.q_hvac.push_back(q);
            for (std::size_t a = 0; a < act.size(); ++a) tr.activity[a].push_back(act[a]);

            const double q_int = spec.internal_gain(occ.occupants, tr.activity_names, act);
            t = rc_ground_truth_step(spec, t, wx.t_out, q_int, spec.solar_gain(wx.ghi), q, cfg.dt);
        }
    }
    tr.validate();
    return tr;
}

double rollout_loss(const ZoneModel& model, const ThermalTrace& trace, const TrainConfig& config,
                    std::vector<double>* grad) {
    auto g = build_loss(model, trace, config);
    if (grad) *grad = g->tape.backward(g->loss);
    return g->loss.value();
}

TrainResult train(ZoneModel& model, const ThermalTrace& trace, const TrainConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    trace.validate();
    if (config.epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (config.fit_normalization) model.set_normalization(Normalization::fit(trace));
    if (config.warm_start && config.epochs > 0) model.warm_start(trace);
    auto g = build_loss(model, trace, config);

    ad::Objective f = [&](std::span<const double> x, std::vector<double>* grad) {
        g->tape.forward(x);
        const double v = g->loss.value();
        if (!std::isfinite(v)) throw RuntimeError("training: non-finite loss");
        if (grad) *grad = g->tape.backward(g->loss);
        return v;
    };
    ad::DescentConfig dc;
    dc.step = config.step;
    dc.iterations = config.epochs;
    const auto r = ad::gradient_descent(f, model.params(), dc);

    model.params() = r.x;
    TrainResult out;
    out.loss_history = r.history;
    out.iterations = r.iterations;
    out.stalled = r.stalled;
    out.windows = g->windows;
    out.tape_nodes = g->tape.size();
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

double rollout_rmse(const ZoneModel& model, const ThermalTrace& trace, std::size_t horizon, std::size_t stride) {
    if (horizon < 1) throw InvalidArgument("horizon must be >= 1");
    if (stride == 0) stride = horizon;
    const auto exo = exogenous_series(trace, 0, trace.size());
    double sse = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s + horizon < trace.size(); s += stride) {
        double t = trace.t_zone[s];
        for (std::size_t k = 0; k < horizon; ++k) {
            t = model.step(t, exo[s + k], trace.q_hvac[s + k]);
            const double e = t - trace.t_zone[s + k + 1];
            sse += e * e;
            ++n;
        }
    }
    if (n == 0) throw InvalidArgument("trace shorter than one rollout window");
    return std::sqrt(sse / static_cast<double>(n));
}

double one_step_rmse(const ZoneModel& model, const ThermalTrace& trace) {
    return rollout_rmse(model, trace, 1, 1);
}

MultiZoneModel::MultiZoneModel(std::vector<std::unique_ptr<ZoneModel>> zones,
                               std::vector<std::vector<double>> conductance)
    : zones_(std::move(zones)), u_(std::move(conductance)) {
    if (zones_.empty() || zones_.size() > 3) throw InvalidArgument("multi-zone models support 1 to 3 zones");
    if (u_.empty()) u_.assign(zones_.size(), std::vector<double>(zones_.size(), 0.0));
    if (u_.size() != zones_.size()) throw InvalidArgument("conductance matrix has the wrong size");
    for (std::size_t i = 0; i < u_.size(); ++i) {
        if (u_[i].size() != zones_.size()) throw InvalidArgument("conductance matrix has the wrong size");
        for (std::size_t j = 0; j < u_.size(); ++j) {
            if (!(u_[i][j] >= 0.0) || u_[i][j] != u_[j][i]) {
                throw InvalidArgument("conductance must be symmetric and >= 0");
            }
        }
    }
}

std::vector<double> MultiZoneModel::step(const std::vector<double>& t_zone, const std::vector<Exogenous>& x,
                                         const std::vector<double>& q_hvac) const {
    const std::size_t n = zones_.size();
    if (t_zone.size() != n || x.size() != n || q_hvac.size() != n) {
        throw InvalidArgument("multi-zone step: one value per zone required");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double q = q_hvac[i];
        for (std::size_t j = 0; j < n; ++j) q += u_[i][j] * (t_zone[j] - t_zone[i]);
        out[i] = zones_[i]->step(t_zone[i], x[i], q);
    }
    return out;
}

} // namespace bldgsim::thermal
