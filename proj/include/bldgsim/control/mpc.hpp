#pragma once

#include <optional>
#include <vector>

#include "bldgsim/autodiff/tape.hpp"
#include "bldgsim/thermal/zone_model.hpp"

namespace bldgsim::control {

struct MpcConfig {
    std::size_t horizon = 8;
    double t_low = 22.0;            // comfort band, degC
    double t_high = 26.0;
    double comfort_weight = 1.0;    // $ per K^2 per step
    double cop = 3.5;               // constant plant efficiency inside the optimizer
    int iterations = 100;
    double step = 0.1;              // largest first move in normalized action units
    double beta = 20.0;             // comfort hinge smoothing

    void validate() const;
};

/// Q_hvac bounds in W. Both must lie on the same side of zero so that
/// |Q| stays differentiable (cooling: lo < 0 = hi, heating: lo = 0 < hi).
struct ActionBounds {
    double lo = -8000.0;
    double hi = 0.0;

    void validate() const;
};

struct MpcForecast {
    std::vector<thermal::Exogenous> exogenous;   // H steps
    std::vector<double> price;                   // $/kWh, H steps
};

/// The MPC objective on a fixed tape. Decision variables are normalized
/// actions u in [0, 1] with Q = lo + (hi - lo) u.
class MpcProblem {
public:
    MpcProblem(const MpcConfig& config, const thermal::ZoneModel& model, double t0, const MpcForecast& forecast,
               ActionBounds bounds);

    std::size_t horizon() const noexcept { return h_; }
    double q_of(double u) const { return bounds_.lo + (bounds_.hi - bounds_.lo) * u; }
    double u_of(double q) const;

    /// Smoothed objective; fills grad (d/du) when non-null.
    double smoothed(std::span<const double> u, std::vector<double>* grad);
    /// Objective with hard hinges, evaluated without the tape.
    double true_cost(std::span<const double> u) const;
    /// Same, for a Q sequence in W.
    double true_cost_q(std::span<const double> q) const;

    ad::Tape& tape() noexcept { return tape_; }
    ad::Var output() const noexcept { return out_; }

private:
    MpcConfig cfg_;
    const thermal::ZoneModel& model_;
    double t0_;
    MpcForecast fc_;
    ActionBounds bounds_;
    std::size_t h_;
    ad::Tape tape_;
    ad::Var out_;
};

struct MpcResult {
    std::vector<double> q;             // best iterate, W
    double cost = 0.0;                 // true cost of q
    double smoothed_cost = 0.0;        // smoothed cost of the last iterate
    int iterations = 0;
    double grad_norm = 0.0;
    std::vector<double> best_history;  // best true cost after each accepted iterate
    std::vector<double> predicted;     // rollout under q, H + 1 values
};

/// Projected gradient descent on the smoothed cost. The first step is
/// normalized so that the largest action moves by config.step.
MpcResult mpc_solve(const MpcConfig& config, const thermal::ZoneModel& model, double t0, const MpcForecast& forecast,
                    ActionBounds bounds, const std::vector<double>& q_initial = {});

/// Receding-horizon wrapper: solves every call, warm-started from the
/// previous solution shifted by one step.
class RecedingHorizon {
public:
    RecedingHorizon(MpcConfig config, ActionBounds bounds) : cfg_(config), bounds_(bounds) {}

    MpcResult solve(const thermal::ZoneModel& model, double t0, const MpcForecast& forecast);
    const std::optional<MpcResult>& last() const noexcept { return last_; }

private:
    MpcConfig cfg_;
    ActionBounds bounds_;
    std::optional<MpcResult> last_;
};

} // namespace bldgsim::control
