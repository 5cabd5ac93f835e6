#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bldgsim::ad {

/// Returns f(x); fills `grad` when it is non-null.
using Objective = std::function<double(std::span<const double> x, std::vector<double>* grad)>;
/// Maps an iterate back into the feasible set in place.
using Projection = std::function<void(std::vector<double>& x)>;

struct DescentConfig {
    double step = 1e-2;
    int iterations = 100;
    int max_halvings = 20;
    double grad_tol = 0.0;   // stop when the max-norm of the gradient falls below
};

struct DescentResult {
    std::vector<double> x;
    std::vector<double> history;   // f at x0, then after every accepted iteration
    int iterations = 0;
    double grad_norm = 0.0;        // max-norm of the last evaluated gradient
    bool stalled = false;          // every halving failed to decrease f
};

/// Gradient descent with a fixed step and halving backoff: each iteration
/// tries x - step * g and halves the step (at most max_halvings times) until
/// f does not increase. The loss history is therefore non-increasing.
DescentResult gradient_descent(const Objective& f, std::vector<double> x0, const DescentConfig& config,
                               const Projection& project = {});

} // namespace bldgsim::ad
