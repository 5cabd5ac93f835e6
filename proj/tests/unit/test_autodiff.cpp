#include <cmath>
#include <random>

#include "doctest.h"

#include "../common/random_tape.hpp"
#include "bldgsim/autodiff/descent.hpp"
#include "bldgsim/autodiff/tape.hpp"
#include "bldgsim/core/error.hpp"

using namespace bldgsim;
using namespace bldgsim::ad;

namespace {

// Independent central-difference oracle.
std::vector<double> fd_gradient(Tape& tape, Var out, std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double x0 = x[k];
        x[k] = x0 + h;
        const double fp = tape.forward(out, x);
        x[k] = x0 - h;
        const double fm = tape.forward(out, x);
        x[k] = x0;
        g[k] = (fp - fm) / (2.0 * h);
    }
    tape.forward(x);
    return g;
}

} // namespace

TEST_CASE("forward values") {
    Tape t(std::vector<double>{3.0});
    Var x = t.param(0);
    CHECK((x * x).value() == 9.0);
    Tape z(std::vector<double>{0.0});
    Var y = z.param(0);
    CHECK(z.softplus(y).value() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(z.tanh(y).value() == 0.0);
    CHECK(z.max0_smooth(y, 4.0).value() == doctest::Approx(std::log(2.0) / 4.0));
    CHECK(z.affine(y, 2.0, -1.0).value() == -1.0);
    CHECK(z.exp(y).value() == 1.0);
}

TEST_CASE("backward on small expressions") {
    Tape t(std::vector<double>{3.0});
    Var x = t.param(0);
    Var f = x * x;
    CHECK(t.backward(f)[0] == 6.0);

    Tape u(std::vector<double>{2.0, 5.0});
    Var a = u.param(0), b = u.param(1);
    auto g = u.backward(a * b);
    CHECK(g[0] == 5.0);
    CHECK(g[1] == 2.0);

    Tape c(std::vector<double>{1.0, 2.0});
    c.param(0);
    c.param(1);
    Var k = c.constant(4.0);
    auto gz = c.backward(k);
    CHECK(gz == std::vector<double>{0.0, 0.0});
    CHECK(grad_check(c, k, std::vector<double>{1.0, 2.0}) == 0.0);
}

TEST_CASE("re-evaluation with new parameters") {
    Tape t;
    Var x = t.param(0), y = t.param(1);
    Var f = exp(x) * y - softplus(y) / (x + 2.0);
    CHECK_FALSE(t.evaluated());
    CHECK_THROWS_AS(t.backward(f), RuntimeError);
    for (double xv : {-1.0, 0.3, 2.0}) {
        const double yv = 0.7;
        const double expect = std::exp(xv) * yv - std::log1p(std::exp(yv)) / (xv + 2.0);
        CHECK(t.forward(f, std::vector<double>{xv, yv}) == doctest::Approx(expect).epsilon(1e-14));
    }
    CHECK_THROWS_AS(t.forward(std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("division guard and argument checks") {
    Tape t(std::vector<double>{0.0});
    Var x = t.param(0);
    CHECK_THROWS_AS(t.div(t.constant(1.0), x), RuntimeError);
    CHECK_THROWS_AS(t.max0_smooth(x, 0.0), InvalidArgument);
    CHECK_THROWS_AS(grad_check(t, x, std::vector<double>{0.0}, 0.1), InvalidArgument);
    CHECK_THROWS_AS(inverse_softplus(0.0), InvalidArgument);
    CHECK(softplus(inverse_softplus(0.3)) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(softplus(800.0) == 800.0);
}

TEST_CASE("every op kind matches central differences") {
    for (int op = 0; op < 10; ++op) {
        Tape t;
        Var a = t.param(0), b = t.param(1);
        Var v;
        switch (op) {
        case 0: v = a + b; break;
        case 1: v = a - b; break;
        case 2: v = a * b; break;
        case 3: v = a / b; break;
        case 4: v = -a; break;
        case 5: v = exp(a); break;
        case 6: v = tanh(a); break;
        case 7: v = softplus(a); break;
        case 8: v = max0_smooth(a, 5.0); break;
        default: v = t.affine(a, -3.0, 2.0); break;
        }
        std::vector<double> x = {0.37, -1.3};
        t.forward(x);
        auto ad = t.backward(v);
        auto fd = fd_gradient(t, v, x);
        for (std::size_t k = 0; k < 2; ++k) CHECK(ad[k] == doctest::Approx(fd[k]).epsilon(1e-8));
    }
}

TEST_CASE("random 20-node composites agree with finite differences") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        Tape t;
        Var out = testing::random_tape(t, rng, 4, 20);
        std::vector<double> x(4);
        for (auto& v : x) v = u(rng);
        t.forward(x);
        auto ad = t.backward(out);
        auto fd = fd_gradient(t, out, x);
        for (std::size_t k = 0; k < x.size(); ++k) {
            CHECK(std::abs(ad[k] - fd[k]) / (std::abs(fd[k]) + 1e-8) < 1e-5);
        }
        CHECK(grad_check(t, out, x) < 1e-5);
    }
}

TEST_CASE("quadratic form: finite differences are exact to roundoff") {
    Tape t;
    Var x = t.param(0), y = t.param(1);
    Var f = 3.0 * x * x + x * y - 2.0 * y * y;
    CHECK(grad_check(t, f, std::vector<double>{0.5, -0.25}) < 1e-9);
}

TEST_CASE("backward visits each node once") {
    Tape t(std::vector<double>{0.5});
    Var x = t.param(0);
    Var acc = x;
    for (int i = 0; i < 100; ++i) acc = acc * x + x;
    t.backward(acc);
    CHECK(t.last_backward_visits() <= t.size());
}

TEST_CASE("gradient descent") {
    Objective f = [](std::span<const double> x, std::vector<double>* g) {
        if (g) *g = {2.0 * (x[0] - 1.0), 8.0 * (x[1] + 2.0)};
        return (x[0] - 1.0) * (x[0] - 1.0) + 4.0 * (x[1] + 2.0) * (x[1] + 2.0);
    };
    SUBCASE("converges on a quadratic with a monotone history") {
        auto r = gradient_descent(f, {5.0, 5.0}, {0.1, 500, 20, 1e-10});
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-6));
        for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
    }
    SUBCASE("a too-large step is halved rather than diverging") {
        auto r = gradient_descent(f, {5.0, 5.0}, {10.0, 200});
        CHECK(r.history.back() < 1e-6);
    }
    SUBCASE("projection keeps iterates feasible") {
        auto r = gradient_descent(f, {0.0, 0.0}, {0.1, 300}, [](std::vector<double>& x) {
            x[1] = std::max(x[1], -1.0);
        });
        CHECK(r.x[1] == -1.0);
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("zero iterations returns the start") {
        auto r = gradient_descent(f, {5.0, 5.0}, {0.1, 0});
        CHECK(r.x == std::vector<double>{5.0, 5.0});
        CHECK(r.history.size() == 1);
    }
}
