#include "bldgsim/autodiff/tape.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bldgsim/core/error.hpp"

namespace bldgsim::ad {

namespace {

constexpr double kDivGuard = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

double inverse_softplus(double y) {
    if (!(y > 0.0)) throw InvalidArgument("inverse_softplus requires y > 0");
    // log(exp(y) - 1) without overflow for large y
    return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

double Var::value() const { return tape->value(*this); }

Var Tape::constant(double value) {
    nodes_.push_back({OpKind::Const, 0, 0, value, 0.0});
    values_.push_back(value);
    return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::param(std::size_t slot) {
    nodes_.push_back({OpKind::Param, static_cast<std::uint32_t>(slot), 0, 0.0, 0.0});
    if (slot + 1 > param_count_) param_count_ = slot + 1;
    if (slot < bound_.size()) {
        values_.push_back(bound_[slot]);
    } else {
        values_.push_back(kNaN);
        evaluated_ = false;
    }
    return {this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::max0_smooth(Var a, double beta) {
    if (!(beta > 0.0)) throw InvalidArgument("max0_smooth requires beta > 0");
    return push(OpKind::Max0Smooth, a.id, a.id, beta);
}

Var Tape::push(OpKind op, std::uint32_t a, std::uint32_t b, double c0, double c1) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    if (a >= id || b >= id) throw InvalidArgument("tape node references a later node");
    nodes_.push_back({op, a, b, c0, c1});
    values_.push_back(evaluated_ ? eval(nodes_.back()) : kNaN);
    return {this, id};
}

double Tape::eval(const Node& n) const {
    const double x = values_[n.a];
    switch (n.op) {
    case OpKind::Const: return n.c0;
    case OpKind::Param: return bound_[n.a];
    case OpKind::Add: return x + values_[n.b];
    case OpKind::Sub: return x - values_[n.b];
    case OpKind::Mul: return x * values_[n.b];
    case OpKind::Div: {
        const double d = values_[n.b];
        if (!(std::abs(d) > kDivGuard)) {
            throw RuntimeError("division guard: |denominator| <= 1e-12");
        }
        return x / d;
    }
    case OpKind::Neg: return -x;
    case OpKind::Exp: return std::exp(x);
    case OpKind::Tanh: return std::tanh(x);
    case OpKind::Softplus: return ad::softplus(x);
    case OpKind::Max0Smooth: return ad::softplus(n.c0 * x) / n.c0;
    case OpKind::Affine: return n.c0 * x + n.c1;
    }
    return kNaN;
}

void Tape::forward(std::span<const double> params) {
    if (params.size() < param_count_) {
        throw InvalidArgument("unbound parameter slot " + std::to_string(params.size()) + " (tape uses " +
                              std::to_string(param_count_) + ")");
    }
    bound_.assign(params.begin(), params.end());
    evaluated_ = false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) values_[i] = eval(nodes_[i]);
    evaluated_ = true;
}

std::vector<double> Tape::backward(Var output) const {
    if (!evaluated_) throw RuntimeError("backward called before forward");
    if (output.id >= nodes_.size()) throw InvalidArgument("backward: output is not on this tape");
    std::vector<double> adj(nodes_.size(), 0.0);
    std::vector<double> grad(param_count_, 0.0);
    adj[output.id] = 1.0;
    visits_ = 0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        ++visits_;
        const double g = adj[i];
        if (g == 0.0) continue;
        const Node& n = nodes_[i];
        const double x = values_[n.a];
        switch (n.op) {
        case OpKind::Const: break;
        case OpKind::Param: grad[n.a] += g; break;
        case OpKind::Add:
            adj[n.a] += g;
            adj[n.b] += g;
            break;
        case OpKind::Sub:
            adj[n.a] += g;
            adj[n.b] -= g;
            break;
        case OpKind::Mul:
            adj[n.a] += g * values_[n.b];
            adj[n.b] += g * x;
            break;
        case OpKind::Div: {
            const double d = values_[n.b];
            adj[n.a] += g / d;
            adj[n.b] -= g * x / (d * d);
            break;
        }
        case OpKind::Neg: adj[n.a] -= g; break;
        case OpKind::Exp: adj[n.a] += g * values_[i]; break;
        case OpKind::Tanh: adj[n.a] += g * (1.0 - values_[i] * values_[i]); break;
        case OpKind::Softplus: adj[n.a] += g * sigmoid(x); break;
        case OpKind::Max0Smooth: adj[n.a] += g * sigmoid(n.c0 * x); break;
        case OpKind::Affine: adj[n.a] += g * n.c0; break;
        }
    }
    return grad;
}

void Tape::clear() {
    nodes_.clear();
    values_.clear();
    param_count_ = 0;
    evaluated_ = true;
    visits_ = 0;
}

Var operator+(Var a, Var b) { return a.tape->add(a, b); }
Var operator-(Var a, Var b) { return a.tape->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape->mul(a, b); }
Var operator/(Var a, Var b) { return a.tape->div(a, b); }
Var operator-(Var a) { return a.tape->neg(a); }
Var operator+(Var a, double c) { return a.tape->affine(a, 1.0, c); }
Var operator+(double c, Var a) { return a.tape->affine(a, 1.0, c); }
Var operator-(Var a, double c) { return a.tape->affine(a, 1.0, -c); }
Var operator-(double c, Var a) { return a.tape->affine(a, -1.0, c); }
Var operator*(Var a, double c) { return a.tape->affine(a, c, 0.0); }
Var operator*(double c, Var a) { return a.tape->affine(a, c, 0.0); }
Var operator/(Var a, double c) {
    if (!(std::abs(c) > kDivGuard)) throw RuntimeError("division guard: |denominator| <= 1e-12");
    return a.tape->affine(a, 1.0 / c, 0.0);
}

Var exp(Var a) { return a.tape->exp(a); }
Var tanh(Var a) { return a.tape->tanh(a); }
Var softplus(Var a) { return a.tape->softplus(a); }
Var max0_smooth(Var a, double beta) { return a.tape->max0_smooth(a, beta); }
Var square(Var a) { return a.tape->mul(a, a); }

Var sum(std::span<const Var> terms) {
    if (terms.empty()) throw InvalidArgument("sum of no terms");
    Var acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = acc + terms[i];
    return acc;
}

double grad_check(Tape& tape, Var output, std::span<const double> params, double h) {
    if (!(h > 0.0 && h <= 1e-2)) throw InvalidArgument("grad_check: h must lie in (0, 1e-2]");
    std::vector<double> x(params.begin(), params.end());
    tape.forward(x);
    const std::vector<double> ad = tape.backward(output);
    double worst = 0.0;
    for (std::size_t k = 0; k < ad.size(); ++k) {
        const double orig = x[k];
        x[k] = orig + h;
        const double fp = tape.forward(output, x);
        x[k] = orig - h;
        const double fm = tape.forward(output, x);
        x[k] = orig;
        const double fd = (fp - fm) / (2.0 * h);
        worst = std::max(worst, std::abs(ad[k] - fd) / (std::abs(fd) + 1e-8));
    }
    tape.forward(x);
    return worst;
}

} // namespace bldgsim::ad
