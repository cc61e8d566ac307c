#ifndef SSLAB_SPLITTING_MATCHING_HPP
#define SSLAB_SPLITTING_MATCHING_HPP

#include "sslab/inner/solver.hpp"
#include "sslab/numerics/fit.hpp"
#include "sslab/splitting/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sslab {

template <class R>
struct MatchingOptions {
    R gamma = R(1) / 2;
    R kappa0 = R(9) / 20;  // kappa = kappa0 log(1/delta)
    R K = R(2);            // outer radius K delta^(gamma-1)
    R rho_in = R(2);       // inner solution on the ray below -i rho_in
    R Y_min = R(3);        // no samples closer to the singularity than this
    int n_points = 6;      // samples along the ray
    int n_seeds = 16;      // angles per sample
    R seed_radius = R(1) / 1000;
    R z_switch = R(-1) / 2;  // time leg stops at Re z = z_switch, then the u leg starts
    R theta_tol = R(1) / R(1e9);
    int max_secant = 20;
    R t_max = R(200);
    IvpOptions<R> ivp;
    InnerOptions<R> inner;
};

template <class R>
struct MatchingSample {
    R Y = 0;                   // s = -i Y
    cplx<R> u;                 // i atan(1/(delta Y)) / d
    R theta = 0;               // landing angle
    cplx<R> psi_outer, psi_inner;
    R err = 0;                 // |psi_outer - psi_inner|
};

template <class R>
struct MatchingEntry {
    R delta = 0, kappa = 0, Y_lo = 0, Y_hi = 0;
    std::vector<MatchingSample<R>> samples;
    R sup_weighted = 0;  // sup |psi_1| |s|^2
    R edge_ratio = 0;    // sup |psi_1| / |psi_in| at the innermost sample
};

template <class R>
struct MatchingReport {
    R gamma = 0;
    std::vector<MatchingEntry<R>> entries;
    LineFit<R> fit;  // log sup_weighted against log delta
};

namespace detail {

/// psi^u = delta^2 (r - R0(u)) on the complexified unstable manifold at u = i eta and a real
/// angle. The seed sits at real angle phi on the jet with complex radius radius e^{i chi};
/// chi is chosen by secant so the landing angle is real.
template <class R>
struct OuterShooter {
    const ScaledSystem<R>& sys;
    const LocalJet<R>& jet;
    const PrecisionCtx& ctx;
    const MatchingOptions<R>& o;

    struct Landing {
        cplx<R> theta, r;
    };

    Landing shoot(const R& phi, const R& chi, const R& eta) const {
        using C = cplx<R>;
        using std::cos;
        using std::sin;
        const auto& sp = sys.spec();
        const R d = sp.d;
        const C rad = std::polar(o.seed_radius, chi);
        auto seed = jet.template point<C>(rad * cos(phi), rad * sin(phi));
        Field<R, C> tfield = [this](const R&, const State<C>& y, State<C>& dy) {
            auto v = sys.template cartesian<C>({y[0], y[1], y[2]});
            dy[0] = v[0];
            dy[1] = v[1];
            dy[2] = v[2];
        };
        CrossingEvent<R> ev;
        ev.component = 2;
        ev.value = o.z_switch;
        ev.direction = +1;
        ev.required = true;
        GbsIntegrator<R, C> legA(tfield, ctx, o.ivp);
        auto ta = legA.integrate(State<C>{seed[0], seed[1], seed[2]}, R(0), o.t_max, ev);
        if (!ta.event) throw NumericalError("matching: time leg did not reach the switch plane");
        State<C> y = ta.event->y;
        // Straight u leg at nearly constant Im u = eta, where Im theta stays small.
        const C uA = std::atanh(y[2]) / d;
        const C seg = C(0, eta) - uA;
        // dzeta/du = X d (1 - z^2) / X_z keeps z = tanh(d u) along the path.
        Field<R, C> ufield = [this, d, seg](const R&, const State<C>& q, State<C>& dq) {
            auto v = sys.template cartesian<C>({q[0], q[1], q[2]});
            const C scale = seg * d * (C(1) - q[2] * q[2]) / v[2];
            dq[0] = v[0] * scale;
            dq[1] = v[1] * scale;
            dq[2] = v[2] * scale;
        };
        GbsIntegrator<R, C> legB(ufield, ctx, o.ivp);
        y = legB.integrate(y, R(0), R(1)).back();
        const auto& e = y;
        Landing L;
        L.r = (e[0] * e[0] + e[1] * e[1]) / R(2);
        if (L.r.real() <= 0 && L.r.imag() == 0) throw NumericalError("matching: landing radius on the branch cut");
        L.theta = C(0, -1) * std::log((e[0] + C(0, 1) * e[1]) / std::sqrt(R(2) * L.r));
        return L;
    }

    /// Landing with Im theta = 0.
    Landing land_real(const R& phi, const R& eta) const {
        using std::abs;
        const R a = jet.tangent_rate();
        const R alpha = sys.params().alpha;
        const R delta = sys.params().delta;
        R c0 = a * eta;
        auto L0 = shoot(phi, c0, eta);
        // Im theta grows like (alpha / (a delta)) chi.
        R c1 = c0 - L0.theta.imag() * a * delta / alpha;
        auto L1 = shoot(phi, c1, eta);
        for (int it = 0; it < o.max_secant; ++it) {
            if (abs(L1.theta.imag()) <= o.theta_tol) return L1;
            const R f0 = L0.theta.imag(), f1 = L1.theta.imag();
            if (f1 == f0) break;
            const R c2 = c1 - f1 * (c1 - c0) / (f1 - f0);
            c0 = c1;
            L0 = L1;
            c1 = c2;
            L1 = shoot(phi, c1, eta);
        }
        if (abs(L1.theta.imag()) <= 100 * o.theta_tol) return L1;
        throw NumericalError("matching: landing angle could not be made real");
    }
};

}  // namespace detail

/// Inner solution of the unstable branch on the ray s = -iY, Y >= rho_in.
template <class R>
InnerSolution<R> matching_inner(const InnerNonlinearity<R>& nl, const MatchingOptions<R>& o, const R& Y_max) {
    InnerDomainSpec<R> dom;
    dom.rho_in = o.rho_in;
    dom.branch = Branch::unstable;
    const cplx<R> top(0, -o.rho_in), bottom(0, -std::max<R>(2 * Y_max, 4 * o.rho_in));
    return solve_inner_ray(nl, dom, top, bottom, o.inner, (bottom - top).imag() * R(-1));
}

/// Matching error at one delta for the conservative (nu = 0) or any nu given, using the inner
/// solution sol (ray from -i rho_in).
template <class R>
MatchingEntry<R> matching_error(const UnfoldingSpec<R>& spec, const R& delta, const InnerSolution<R>& sol,
                                const PrecisionCtx& ctx, const MatchingOptions<R>& o = {}, const R& nu = R(0)) {
    using C = cplx<R>;
    using std::abs;
    using std::atan;
    using std::cos;
    using std::log;
    using std::pow;
    if (!(o.gamma > 0) || !(o.gamma < 1)) throw ConfigError("matching gamma must lie in (0, 1)");
    const R d = spec.d;
    MatchingEntry<R> e;
    e.delta = delta;
    e.kappa = o.kappa0 * log(R(1) / delta);
    e.Y_lo = std::max<R>({e.kappa * d, o.rho_in, o.Y_min});
    e.Y_hi = o.K * pow(delta, o.gamma - 1);
    if (!(e.Y_hi > e.Y_lo)) throw ConfigError("matching domain is empty for this delta");
    const auto& ray = sol.ray().psi;
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < ray.size(); ++i) {
        const R Y = -ray.s(i).imag();
        if (abs(ray.s(i).real()) > R(1) / R(1e9) * Y) throw ConfigError("matching needs a vertical inner ray");
        if (Y >= e.Y_lo && Y <= e.Y_hi) nodes.push_back(i);
    }
    if (nodes.size() < 2) throw NumericalError("inner ray has too few nodes in the matching domain");
    std::vector<std::size_t> pick;
    const int m = std::min<int>(o.n_points, static_cast<int>(nodes.size()));
    for (int k = 0; k < m; ++k) pick.push_back(nodes[k * (nodes.size() - 1) / std::max(m - 1, 1)]);
    pick.erase(std::unique(pick.begin(), pick.end()), pick.end());

    auto sys = scale_system(spec, delta * delta, nu);
    auto cps = critical_points(sys, ctx);
    LocalJet<R> jet(sys, cps.first);
    detail::OuterShooter<R> sh{sys, jet, ctx, o};
    const R b = spec.b;
    R edge_in = 0, edge_err = 0;
    for (std::size_t node : pick) {
        const R Y = -ray.s(node).imag();
        const R eta = atan(R(1) / (delta * Y)) / d;
        const R sec = R(1) / cos(d * eta);
        const R R0 = (d + 1) / (2 * b) * sec * sec;
        for (int k = 0; k < o.n_seeds; ++k) {
            const R phi = 2 * pi<R>() * R(k) / R(o.n_seeds);
            auto L = sh.land_real(phi, eta);
            MatchingSample<R> smp;
            smp.Y = Y;
            smp.u = C(0, eta);
            smp.theta = L.theta.real();
            smp.psi_outer = delta * delta * (L.r - R0);
            smp.psi_inner = ray.eval(node, C(smp.theta));
            smp.err = abs(smp.psi_outer - smp.psi_inner);
            e.sup_weighted = std::max<R>(e.sup_weighted, smp.err * Y * Y);
            if (node == pick.front()) {
                edge_err = std::max(edge_err, smp.err);
                edge_in = std::max<R>(edge_in, abs(smp.psi_inner));
            }
            e.samples.push_back(smp);
        }
    }
    e.edge_ratio = edge_in > 0 ? edge_err / edge_in : R(0);
    return e;
}

/// Slope of log sup |psi_1| |s|^2 against log delta.
template <class R>
MatchingReport<R> matching_report(std::vector<MatchingEntry<R>> entries, const R& gamma) {
    using std::log;
    MatchingReport<R> rep;
    rep.gamma = gamma;
    std::vector<R> x, y;
    for (const auto& e : entries)
        if (e.sup_weighted > 0) {
            x.push_back(log(e.delta));
            y.push_back(log(e.sup_weighted));
        }
    if (x.size() >= 2) rep.fit = fit_line(x, y);
    rep.entries = std::move(entries);
    return rep;
}

}  // namespace sslab

#endif
