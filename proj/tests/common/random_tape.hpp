#pragma once

#include <random>
#include <vector>

#include "bldgsim/autodiff/tape.hpp"

namespace bldgsim::testing {

// Random composite expression over `params` slots with `nodes` operations.
// Operands are drawn from earlier nodes; magnitudes stay O(1) so that
// central differences remain accurate.
inline ad::Var random_tape(ad::Tape& tape, std::mt19937_64& rng, std::size_t params, std::size_t nodes) {
    std::vector<ad::Var> pool;
    for (std::size_t i = 0; i < params; ++i) pool.push_back(tape.param(i));
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    pool.push_back(tape.constant(coef(rng)));
    std::uniform_int_distribution<int> op(0, 9);
    auto pick = [&] { return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]; };
    for (std::size_t n = 0; n < nodes; ++n) {
        ad::Var a = pick(), b = pick(), v;
        switch (op(rng)) {
        case 0: v = tape.add(a, b); break;
        case 1: v = tape.sub(a, b); break;
        case 2: v = tape.tanh(tape.mul(a, b)); break;
        case 3: v = tape.div(a, tape.affine(tape.softplus(b), 1.0, 0.5)); break;
        case 4: v = tape.neg(a); break;
        case 5: v = tape.exp(tape.tanh(a)); break;
        case 6: v = tape.tanh(a); break;
        case 7: v = tape.softplus(a); break;
        case 8: v = tape.max0_smooth(a, 3.0); break;
        default: v = tape.affine(a, coef(rng), coef(rng)); break;
        }
        pool.push_back(v);
    }
    // Mix in every parameter so no gradient entry is structurally zero.
    ad::Var out = pool.back();
    for (std::size_t i = 0; i < params; ++i) out = tape.add(out, tape.mul(tape.constant(0.1), pool[i]));
    return out;
}

} // namespace bldgsim::testing
