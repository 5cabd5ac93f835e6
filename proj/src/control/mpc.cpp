#include "bldgsim/control/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "bldgsim/autodiff/descent.hpp"
#include "bldgsim/core/error.hpp"

namespace bldgsim::control {

void MpcConfig::validate() const {
    if (horizon < 1) throw InvalidArgument("MPC horizon must be >= 1");
    if (!(comfort_weight >= 0.0)) throw InvalidArgument("MPC comfort weight must be >= 0");
    if (!(t_low <= t_high)) throw InvalidArgument("MPC comfort band must be ordered");
    if (!(cop > 0.0)) throw InvalidArgument("MPC COP must be > 0");
    if (iterations < 0) throw InvalidArgument("MPC iterations must be >= 0");
    if (!(step > 0.0)) throw InvalidArgument("MPC step must be > 0");
    if (!(beta > 0.0)) throw InvalidArgument("MPC smoothing beta must be > 0");
}

void ActionBounds::validate() const {
    if (!(lo < hi)) throw InvalidArgument("MPC action bounds must satisfy lo < hi");
    if (lo < 0.0 && hi > 0.0) throw InvalidArgument("MPC action bounds must not straddle zero");
}

namespace {

double sign_of(const ActionBounds& b) { return b.hi <= 0.0 ? -1.0 : 1.0; }

} // namespace

MpcProblem::MpcProblem(const MpcConfig& config, const thermal::ZoneModel& model, double t0,
                       const MpcForecast& forecast, ActionBounds bounds)
    : cfg_(config), model_(model), t0_(t0), fc_(forecast), bounds_(bounds), h_(config.horizon) {
    cfg_.validate();
    bounds_.validate();
    if (fc_.exogenous.size() != h_ || fc_.price.size() != h_) {
        throw InvalidArgument("MPC forecast length must equal the horizon (" + std::to_string(h_) + ")");
    }
    for (const auto& x : fc_.exogenous) {
        if (x.activity.size() != model_.activity_names().size()) {
            throw InvalidArgument("MPC forecast activity count does not match the model");
        }
    }
    for (double p : fc_.price) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("MPC prices must be finite and >= 0");
    }
    if (!std::isfinite(t0_)) throw InvalidArgument("MPC initial temperature must be finite");

    std::vector<double> u0(h_, u_of(0.0));
    tape_ = ad::Tape(u0);
    std::vector<ad::Var> p;
    p.reserve(model_.params().size());
    for (double v : model_.params()) p.push_back(tape_.constant(v));
    const double hours = model_.dt() / 3600.0;
    const double sgn = sign_of(bounds_);
    ad::Var t = tape_.constant(t0_);
    std::vector<ad::Var> terms;
    for (std::size_t k = 0; k < h_; ++k) {
        ad::Var q = tape_.affine(tape_.param(k), bounds_.hi - bounds_.lo, bounds_.lo);
        terms.push_back(tape_.affine(q, fc_.price[k] * sgn * hours / (1000.0 * cfg_.cop), 0.0));
        t = model_.step(p, t, fc_.exogenous[k], q, nullptr);
        if (cfg_.comfort_weight > 0.0) {
            ad::Var over = ad::max0_smooth(t - cfg_.t_high, cfg_.beta);
            ad::Var under = ad::max0_smooth(cfg_.t_low - t, cfg_.beta);
            terms.push_back(cfg_.comfort_weight * (ad::square(over) + ad::square(under)));
        }
    }
    out_ = ad::sum(terms);
}

double MpcProblem::u_of(double q) const {
    return std::clamp((q - bounds_.lo) / (bounds_.hi - bounds_.lo), 0.0, 1.0);
}

double MpcProblem::smoothed(std::span<const double> u, std::vector<double>* grad) {
    const double f = tape_.forward(out_, u);
    if (!std::isfinite(f)) throw RuntimeError("MPC: non-finite smoothed cost");
    if (grad) *grad = tape_.backward(out_);
    return f;
}

double MpcProblem::true_cost_q(std::span<const double> q) const {
    if (q.size() != h_) throw InvalidArgument("MPC action sequence length must equal the horizon");
    const double hours = model_.dt() / 3600.0;
    double t = t0_;
    double cost = 0.0;
    for (std::size_t k = 0; k < h_; ++k) {
        cost += fc_.price[k] * std::abs(q[k]) * hours / (1000.0 * cfg_.cop);
        t = model_.step(t, fc_.exogenous[k], q[k]);
        const double over = std::max(0.0, t - cfg_.t_high);
        const double under = std::max(0.0, cfg_.t_low - t);
        cost += cfg_.comfort_weight * (over * over + under * under);
    }
    if (!std::isfinite(cost)) throw RuntimeError("MPC: non-finite cost");
    return cost;
}

double MpcProblem::true_cost(std::span<const double> u) const {
    std::vector<double> q(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) q[k] = q_of(u[k]);
    return true_cost_q(q);
}

MpcResult mpc_solve(const MpcConfig& config, const thermal::ZoneModel& model, double t0, const MpcForecast& forecast,
                    ActionBounds bounds, const std::vector<double>& q_initial) {
    MpcProblem prob(config, model, t0, forecast, bounds);
    const std::size_t h = prob.horizon();
    if (!q_initial.empty() && q_initial.size() != h) {
        throw InvalidArgument("MPC warm start length must equal the horizon");
    }
    std::vector<double> u0(h, prob.u_of(0.0));
    for (std::size_t k = 0; k < q_initial.size(); ++k) u0[k] = prob.u_of(q_initial[k]);

    MpcResult r;
    std::vector<double> best_u = u0;
    double best = prob.true_cost(u0);

    // Accepted iterates are exactly the points where a gradient is requested.
    auto objective = [&](std::span<const double> u, std::vector<double>* grad) {
        const double f = prob.smoothed(u, grad);
        if (grad) {
            const double c = prob.true_cost(u);
            if (c < best) {
                best = c;
                best_u.assign(u.begin(), u.end());
            }
            r.best_history.push_back(best);
        }
        return f;
    };
    auto project = [](std::vector<double>& u) {
        for (double& v : u) v = std::clamp(v, 0.0, 1.0);
    };

    std::vector<double> g0;
    prob.smoothed(u0, &g0);
    double gmax = 0.0;
    for (double g : g0) gmax = std::max(gmax, std::abs(g));

    ad::DescentConfig dc;
    dc.iterations = config.iterations;
    dc.step = gmax > 0.0 ? config.step / gmax : 1.0;
    const auto d = ad::gradient_descent(objective, u0, dc, project);

    r.iterations = d.iterations;
    r.grad_norm = d.grad_norm;
    r.smoothed_cost = d.history.back();
    r.cost = best;
    r.q.resize(h);
    for (std::size_t k = 0; k < h; ++k) r.q[k] = prob.q_of(best_u[k]);
    r.predicted = thermal::rollout_predict(model, t0, forecast.exogenous, r.q);
    return r;
}

MpcResult RecedingHorizon::solve(const thermal::ZoneModel& model, double t0, const MpcForecast& forecast) {
    std::vector<double> warm;
    if (last_ && last_->q.size() == cfg_.horizon) {
        warm.assign(last_->q.begin() + 1, last_->q.end());
        warm.push_back(last_->q.back());
    }
    last_ = mpc_solve(cfg_, model, t0, forecast, bounds_, warm);
    return *last_;
}

} // namespace bldgsim::control
