#ifndef SSLAB_TESTS_FIXTURES_HPP
#define SSLAB_TESTS_FIXTURES_HPP

#include "sslab/model/unfolding.hpp"

namespace fixtures {

inline sslab::MonomialSpec mono(char t, int a, int b, int c, int m, int n, const char* coeff) {
    return {t, {a, b, c, m, n}, coeff};
}

inline sslab::ModelConfig zero_model() {
    sslab::ModelConfig m;
    m.alpha0 = "1";
    m.alpha3 = "0.4";
    m.beta1 = "1";
    m.gamma2 = "1";
    return m;
}

/// Divergence-free cubic perturbation with h3 = 1/2.
inline sslab::ModelConfig conservative_model() {
    sslab::ModelConfig m;
    m.alpha0 = "1";
    m.alpha2 = "0.3";
    m.alpha3 = "0.4";
    m.beta1 = "1";
    m.gamma2 = "1";
    m.gamma3 = "0.2";
    m.conservative = true;
    m.monomials = {
        mono('f', 1, 0, 2, 0, 0, "-0.75"), mono('f', 0, 3, 0, 0, 0, "0.2"), mono('f', 0, 1, 2, 0, 0, "0.1"),
        mono('g', 0, 1, 2, 0, 0, "-0.75"), mono('g', 1, 0, 2, 0, 0, "0.15"), mono('g', 2, 0, 1, 0, 0, "0.3"),
        mono('h', 0, 0, 3, 0, 0, "0.5"),   mono('h', 2, 1, 0, 0, 0, "0.25"), mono('h', 2, 0, 0, 1, 0, "0.1"),
    };
    return m;
}

/// Generic cubic-and-quartic perturbation, d = 3/2.
inline sslab::ModelConfig dissipative_model() {
    sslab::ModelConfig m;
    m.alpha0 = "1";
    m.alpha1 = "0.2";
    m.alpha2 = "0.1";
    m.alpha3 = "0.3";
    m.beta1 = "1.5";
    m.gamma2 = "0.8";
    m.gamma3 = "0.1";
    m.gamma4 = "0.05";
    m.gamma5 = "-0.1";
    m.monomials = {
        mono('f', 3, 0, 0, 0, 0, "0.2"), mono('f', 1, 0, 2, 0, 0, "0.3"), mono('f', 0, 1, 1, 1, 0, "0.1"),
        mono('g', 0, 1, 2, 0, 0, "-0.2"), mono('g', 2, 1, 0, 0, 0, "0.1"), mono('g', 1, 0, 1, 0, 1, "0.05"),
        mono('h', 0, 0, 3, 0, 0, "0.4"), mono('h', 2, 0, 1, 0, 0, "0.3"), mono('h', 0, 0, 4, 0, 0, "0.1"),
        mono('f', 0, 0, 4, 0, 0, "0.2"),
    };
    return m;
}

/// Reversible under (x, y, z, t) -> (x, -y, -z, -t): alpha3 = 0, and the perturbation has
/// y+z degree odd in f, even in g and h.
inline sslab::ModelConfig reversible_model() {
    sslab::ModelConfig m;
    m.alpha0 = "1";
    m.beta1 = "1.2";
    m.gamma2 = "0.9";
    m.monomials = {
        mono('f', 0, 3, 0, 0, 0, "0.2"), mono('f', 0, 1, 2, 0, 0, "0.1"), mono('f', 2, 1, 0, 0, 0, "0.3"),
        mono('g', 1, 0, 2, 0, 0, "0.15"), mono('g', 3, 0, 0, 0, 0, "0.2"),
        mono('h', 3, 0, 0, 0, 0, "0.25"), mono('h', 1, 0, 2, 0, 0, "0.1"),
    };
    return m;
}

}  // namespace fixtures

#endif
