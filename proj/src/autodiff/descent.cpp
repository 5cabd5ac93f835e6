#include "bldgsim/autodiff/descent.hpp"

#include <algorithm>
#include <cmath>

#include "bldgsim/core/error.hpp"

namespace bldgsim::ad {

DescentResult gradient_descent(const Objective& f, std::vector<double> x0, const DescentConfig& config,
                               const Projection& project) {
    if (!(config.step > 0.0)) throw InvalidArgument("descent step must be > 0");
    if (config.iterations < 0 || config.max_halvings < 0) throw InvalidArgument("descent counts must be >= 0");

    DescentResult r;
    if (project) project(x0);
    r.x = std::move(x0);
    std::vector<double> grad;
    double fx = f(r.x, &grad);
    if (!std::isfinite(fx)) throw RuntimeError("descent: non-finite objective at the initial point");
    r.history.push_back(fx);

    auto max_norm = [](const std::vector<double>& g) {
        double m = 0.0;
        for (double v : g) m = std::max(m, std::abs(v));
        return m;
    };
    r.grad_norm = max_norm(grad);

    std::vector<double> trial(r.x.size());
    for (int it = 0; it < config.iterations; ++it) {
        if (r.grad_norm <= config.grad_tol) break;
        double step = config.step;
        bool accepted = false;
        double ftrial = fx;
        for (int h = 0; h <= config.max_halvings; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = r.x[i] - step * grad[i];
            if (project) project(trial);
            ftrial = f(trial, nullptr);
            if (std::isfinite(ftrial) && ftrial <= fx) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            r.stalled = true;
            break;
        }
        r.x.swap(trial);
        fx = f(r.x, &grad);
        r.history.push_back(fx);
        r.grad_norm = max_norm(grad);
        ++r.iterations;
    }
    return r;
}

} // namespace bldgsim::ad
