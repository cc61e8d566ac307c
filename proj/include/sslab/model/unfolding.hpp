#ifndef SSLAB_MODEL_UNFOLDING_HPP
#define SSLAB_MODEL_UNFOLDING_HPP

#include "sslab/model/polynomial.hpp"
#include "sslab/numerics/precision.hpp"

#include <array>
#include <string>
#include <vector>

namespace sslab {

/// One perturbation monomial as read from a model file: target in {f,g,h},
/// exponents of (xbar, ybar, zbar, mu, nu) and a decimal coefficient.
struct MonomialSpec {
    char target = 'f';
    std::array<int, 5> exps{};
    std::string coeff = "0";
};

/// Precision-independent model description. Coefficients stay decimal strings
/// until instantiated at a working precision.
struct ModelConfig {
    std::string alpha0 = "1", alpha1 = "0", alpha2 = "0", alpha3 = "0";
    std::string beta1 = "1", gamma2 = "1";
    std::string gamma3 = "0", gamma4 = "0", gamma5 = "0";
    std::string h3;  // empty: taken from the zbar^3 coefficient of hbar
    bool conservative = false;
    int max_degree = 5;
    std::vector<MonomialSpec> monomials;
};

/// The order-three normal form with polynomial remainders.
/// Variables of fbar, gbar, hbar: (xbar, ybar, zbar, mu, nu).
/// Variables of f, g, h: (X, Y, Z, delta, nu) with X = delta*x etc., so that the
/// scaled field is X0 + delta^-2 (f, g, h)(delta*zeta, delta, delta*sigma).
template <class R>
struct UnfoldingSpec {
    R alpha0, alpha1, alpha2, alpha3;
    R d, b;
    R gamma3, gamma4, gamma5;
    R h3;
    bool conservative = false;
    Poly5<R> fbar, gbar, hbar;  // hbar without the gamma3..5 terms
    Poly5<R> f, g, h;

    const R& c() const { return alpha3; }

    /// alpha(delta^2, delta*sigma)
    R alpha_of(const R& delta, const R& sigma) const {
        return alpha0 + alpha1 * delta * sigma + alpha2 * delta * delta;
    }
};

namespace detail {

template <class R>
Poly5<R> monomial5(std::array<int, 5> e, const R& c) {
    Poly5<R> p;
    p.add(e, c);
    return p;
}

/// Rewrites a polynomial in (xbar, ybar, zbar, mu, nu) as one in (X, Y, Z, delta, nu)
/// with zbar = Z - delta^2 h3/2 and mu = delta^2.
template <class R>
Poly5<R> to_scaled_variables(const Poly5<R>& bar, const R& h3) {
    Poly5<R> zshift;
    zshift.add({0, 0, 1, 0, 0}, R(1));
    zshift.add({0, 0, 0, 2, 0}, -h3 / 2);
    Poly5<R> out;
    for (const auto& t : bar.terms()) {
        Poly5<R> m = monomial5<R>({t.e[0], t.e[1], 0, 2 * t.e[3], t.e[4]}, t.c);
        out.add(m * zshift.pow(t.e[2]));
    }
    out.prune();
    return out;
}

}  // namespace detail

template <class R>
UnfoldingSpec<R> make_unfolding(const ModelConfig& cfg) {
    UnfoldingSpec<R> s;
    auto num = [](const std::string& name, const std::string& v) {
        try {
            return parse_real<R>(v);
        } catch (const std::exception&) {
            throw ConfigError("coefficient " + name + " is not a number: '" + v + "'");
        }
    };
    s.alpha0 = num("alpha0", cfg.alpha0);
    s.alpha1 = num("alpha1", cfg.alpha1);
    s.alpha2 = num("alpha2", cfg.alpha2);
    s.alpha3 = num("alpha3", cfg.alpha3);
    s.d = num("beta1", cfg.beta1);
    s.b = num("gamma2", cfg.gamma2);
    s.gamma3 = num("gamma3", cfg.gamma3);
    s.gamma4 = num("gamma4", cfg.gamma4);
    s.gamma5 = num("gamma5", cfg.gamma5);
    s.conservative = cfg.conservative;

    if (s.alpha0 == 0) throw ConfigError("alpha0 must be nonzero");
    if (!(s.d > 0)) throw ConfigError("beta1 must be positive");
    if (!(s.b > 0)) throw ConfigError("gamma2 must be positive");
    if (s.conservative && s.d != 1) throw ConfigError("conservative models require beta1 = 1");

    for (const auto& m : cfg.monomials) {
        int deg = Poly5<R>::degree_of(m.exps);
        if (deg < 3)
            throw ConfigError(std::string("perturbation monomial of degree < 3 in ") + m.target +
                              "bar (put mu^2, nu^2, mu*nu terms of hbar in gamma3..gamma5)");
        if (deg > cfg.max_degree)
            throw ConfigError("perturbation monomial exceeds max_degree " + std::to_string(cfg.max_degree));
        R c = num(std::string(1, m.target) + "bar monomial", m.coeff);
        switch (m.target) {
            case 'f': s.fbar.add(m.exps, c); break;
            case 'g': s.gbar.add(m.exps, c); break;
            case 'h': s.hbar.add(m.exps, c); break;
            default: throw ConfigError(std::string("unknown monomial target '") + m.target + "'");
        }
    }
    s.fbar.prune();
    s.gbar.prune();
    s.hbar.prune();

    R h3_poly = s.hbar.coeff({0, 0, 3, 0, 0});
    if (cfg.h3.empty()) {
        s.h3 = h3_poly;
    } else {
        s.h3 = num("h3", cfg.h3);
        if (s.h3 != h3_poly)
            throw ConfigError("h3 must equal the zbar^3 coefficient of hbar (" + to_sci(h3_poly, 12) + ")");
    }

    if (s.conservative) {
        // Volume preservation at nu = 0: div(fbar, gbar, hbar) must vanish identically.
        Poly5<R> div = s.fbar.derivative(0);
        div.add(s.gbar.derivative(1));
        div.add(s.hbar.derivative(2));
        div.prune();
        for (const auto& t : div.terms())
            if (t.e[4] == 0) throw ConfigError("conservative flag set but the perturbation has nonzero divergence");
    }

    // Full f, g, h in the scaled variables, including the terms produced by the z shift.
    const R half_h3 = s.h3 / 2;
    s.f = detail::to_scaled_variables(s.fbar, s.h3);
    s.f.add({1, 0, 0, 2, 0}, s.d * half_h3);
    s.f.add({0, 1, 0, 2, 0}, -s.c() * half_h3);
    s.g = detail::to_scaled_variables(s.gbar, s.h3);
    s.g.add({1, 0, 0, 2, 0}, s.c() * half_h3);
    s.g.add({0, 1, 0, 2, 0}, s.d * half_h3);
    Poly5<R> hb = s.hbar;
    hb.add({0, 0, 0, 2, 0}, s.gamma3);
    hb.add({0, 0, 0, 0, 2}, s.gamma4);
    hb.add({0, 0, 0, 1, 1}, s.gamma5);
    s.h = detail::to_scaled_variables(hb, s.h3);
    s.h.add({0, 0, 1, 2, 0}, -s.h3);
    s.h.add({0, 0, 0, 4, 0}, s.h3 * s.h3 / 4);
    s.f.prune();
    s.g.prune();
    s.h.prune();
    return s;
}

}  // namespace sslab

#endif
