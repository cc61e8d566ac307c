#ifndef SSLAB_MODEL_SCALED_HPP
#define SSLAB_MODEL_SCALED_HPP

#include "sslab/model/polynomial.hpp"
#include "sslab/model/unfolding.hpp"

#include <array>
#include <cmath>

namespace sslab {

template <class R>
struct ScaledParams {
    R mu, nu, delta, sigma, alpha;
};

template <class R>
ScaledParams<R> make_scaled_params(const UnfoldingSpec<R>& spec, const R& mu, const R& nu) {
    using std::sqrt;
    if (!(mu > 0)) throw ConfigError("mu must be positive");
    R delta = sqrt(mu);
    if (!(abs(nu) < spec.d * delta)) throw ConfigError("|nu| must be below beta1*sqrt(mu)");
    if (spec.conservative && nu != 0) throw ConfigError("conservative models require nu = 0");
    R sigma = nu / delta;
    return {mu, nu, delta, sigma, spec.alpha_of(delta, sigma)};
}

/// The scaled vector field X0 + delta^-2 X1(delta*zeta, delta, delta*sigma) as three
/// polynomials in (x, y, z), plus its polar form.
template <class R>
class ScaledSystem {
public:
    ScaledSystem(const UnfoldingSpec<R>& spec, const ScaledParams<R>& p) : spec_(spec), p_(p) {
        const R a_over_d = p.alpha / p.delta;
        const R& c = spec.c();
        const R& d = spec.d;
        fx_.add({1, 0, 0}, p.sigma);
        fx_.add({1, 0, 1}, -d);
        fx_.add({0, 1, 0}, a_over_d);
        fx_.add({0, 1, 1}, c);
        fy_.add({1, 0, 0}, -a_over_d);
        fy_.add({1, 0, 1}, -c);
        fy_.add({0, 1, 0}, p.sigma);
        fy_.add({0, 1, 1}, -d);
        fz_.add({0, 0, 0}, R(-1));
        fz_.add({2, 0, 0}, spec.b);
        fz_.add({0, 2, 0}, spec.b);
        fz_.add({0, 0, 2}, R(1));
        add_scaled(fx_, spec.f);
        add_scaled(fy_, spec.g);
        add_scaled(fz_, spec.h);
        fx_.prune();
        fy_.prune();
        fz_.prune();
        for (int i = 0; i < 3; ++i) {
            jac_[0][i] = fx_.derivative(i);
            jac_[1][i] = fy_.derivative(i);
            jac_[2][i] = fz_.derivative(i);
        }
    }

    const ScaledParams<R>& params() const { return p_; }
    const UnfoldingSpec<R>& spec() const { return spec_; }
    const Poly3<R>& component(int i) const { return i == 0 ? fx_ : (i == 1 ? fy_ : fz_); }
    const Poly3<R>& jacobian_entry(int i, int j) const { return jac_[i][j]; }

    /// Contribution of a single (X,Y,Z,delta,nu) monomial after scaling: a*delta^(deg-2)*sigma^g.
    static R scaled_coefficient(const typename Poly5<R>::Term& t, const R& delta, const R& sigma) {
        using std::pow;
        int deg = Poly5<R>::degree_of(t.e);
        R c = t.c;
        for (int k = 0; k < deg - 2; ++k) c *= delta;
        for (int k = 0; k < t.e[4]; ++k) c *= sigma;
        return c;
    }

    template <class T>
    std::array<T, 3> cartesian(const std::array<T, 3>& z) const {
        return {fx_.eval(z), fy_.eval(z), fz_.eval(z)};
    }

    template <class T>
    std::array<std::array<T, 3>, 3> jacobian(const std::array<T, 3>& z) const {
        std::array<std::array<T, 3>, 3> J;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) J[i][j] = jac_[i][j].eval(z);
        return J;
    }

    /// (r, theta, z)' with x = sqrt(2r) cos(theta), y = sqrt(2r) sin(theta).
    template <class T>
    std::array<T, 3> polar(const std::array<T, 3>& q) const {
        using std::cos;
        using std::sin;
        using std::sqrt;
        T rt = sqrt(T(2) * q[0]);
        T x = rt * cos(q[1]), y = rt * sin(q[1]);
        auto v = cartesian<T>({x, y, q[2]});
        return {x * v[0] + y * v[1], (x * v[1] - y * v[0]) / (T(2) * q[0]), v[2]};
    }

private:
    void add_scaled(Poly3<R>& target, const Poly5<R>& src) {
        for (const auto& t : src.terms())
            target.add({t.e[0], t.e[1], t.e[2]}, scaled_coefficient(t, p_.delta, p_.sigma));
    }

    UnfoldingSpec<R> spec_;
    ScaledParams<R> p_;
    Poly3<R> fx_, fy_, fz_;
    std::array<std::array<Poly3<R>, 3>, 3> jac_;
};

template <class R>
ScaledSystem<R> scale_system(const UnfoldingSpec<R>& spec, const R& mu, const R& nu) {
    return ScaledSystem<R>(spec, make_scaled_params(spec, mu, nu));
}

template <class T>
std::array<T, 3> polar_to_cartesian(const std::array<T, 3>& q) {
    using std::cos;
    using std::sin;
    using std::sqrt;
    T rt = sqrt(T(2) * q[0]);
    return {rt * cos(q[1]), rt * sin(q[1]), q[2]};
}

/// Inverse of polar_to_cartesian for real states, theta in (-pi, pi].
template <class R>
std::array<R, 3> cartesian_to_polar(const std::array<R, 3>& z) {
    using std::atan2;
    return {(z[0] * z[0] + z[1] * z[1]) / 2, atan2(z[1], z[0]), z[2]};
}

}  // namespace sslab

#endif
