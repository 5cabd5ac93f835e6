#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bldgsim::ad {

enum class OpKind : std::uint8_t {
    Const,
    Param,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Tanh,
    Softplus,
    Max0Smooth,   // softplus(beta * x) / beta
    Affine,       // a * x + b with constant a, b
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid with its tape.
struct Var {
    Tape* tape = nullptr;
    std::uint32_t id = 0;

    double value() const;
};

/// Append-only scalar computation graph with reverse-mode gradients.
///
/// Nodes are evaluated eagerly while parameters are bound, and the whole tape
/// can be re-evaluated for new parameter values with forward(). Node inputs
/// always reference earlier nodes.
class Tape {
public:
    Tape() = default;
    explicit Tape(std::vector<double> params) : bound_(std::move(params)) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = default;
    Tape& operator=(Tape&&) = default;

    Var constant(double value);
    Var param(std::size_t slot);

    Var add(Var a, Var b) { return push(OpKind::Add, a.id, b.id); }
    Var sub(Var a, Var b) { return push(OpKind::Sub, a.id, b.id); }
    Var mul(Var a, Var b) { return push(OpKind::Mul, a.id, b.id); }
    Var div(Var a, Var b) { return push(OpKind::Div, a.id, b.id); }
    Var neg(Var a) { return push(OpKind::Neg, a.id, a.id); }
    Var exp(Var a) { return push(OpKind::Exp, a.id, a.id); }
    Var tanh(Var a) { return push(OpKind::Tanh, a.id, a.id); }
    Var softplus(Var a) { return push(OpKind::Softplus, a.id, a.id); }
    /// Smooth max(0, x); throws InvalidArgument unless beta > 0.
    Var max0_smooth(Var a, double beta);
    Var affine(Var a, double scale, double offset) { return push(OpKind::Affine, a.id, a.id, scale, offset); }

    std::size_t size() const noexcept { return nodes_.size(); }
    /// One more than the largest parameter slot referenced.
    std::size_t param_count() const noexcept { return param_count_; }
    bool evaluated() const noexcept { return evaluated_; }

    /// Binds `params` and re-evaluates every node. Throws InvalidArgument for an
    /// unbound slot and RuntimeError when a division guard trips.
    void forward(std::span<const double> params);
    double forward(Var output, std::span<const double> params) {
        forward(params);
        return output.value();
    }

    double value(Var v) const { return values_.at(v.id); }

    /// d(output)/d(param slot) for every slot. Requires an evaluated tape.
    std::vector<double> backward(Var output) const;

    /// Nodes visited by the most recent backward().
    std::size_t last_backward_visits() const noexcept { return visits_; }

    OpKind op(std::uint32_t id) const { return nodes_.at(id).op; }

    void clear();

private:
    struct Node {
        OpKind op;
        std::uint32_t a;
        std::uint32_t b;
        double c0;
        double c1;
    };

    Var push(OpKind op, std::uint32_t a, std::uint32_t b, double c0 = 0.0, double c1 = 0.0);
    double eval(const Node& n) const;

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> bound_;
    std::size_t param_count_ = 0;
    bool evaluated_ = true;
    mutable std::size_t visits_ = 0;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);

Var exp(Var a);
Var tanh(Var a);
Var softplus(Var a);
Var max0_smooth(Var a, double beta);
Var square(Var a);
Var sum(std::span<const Var> terms);

// Scalar helpers shared with non-differentiated code paths.
double softplus(double x);
double sigmoid(double x);
double inverse_softplus(double y);

/// Central-difference check: max over slots of |g_ad - g_fd| / (|g_fd| + 1e-8).
/// Leaves the tape evaluated at `params`. h must lie in (0, 1e-2].
double grad_check(Tape& tape, Var output, std::span<const double> params, double h = 1e-5);

} // namespace bldgsim::ad
