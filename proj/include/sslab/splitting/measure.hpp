#ifndef SSLAB_SPLITTING_MEASURE_HPP
#define SSLAB_SPLITTING_MEASURE_HPP

#include "sslab/splitting/manifold.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace sslab {

/// max(192, 10 (pi / (2 delta)) / ln 2 + 64): the exponentially small splitting keeps at least
/// 40 bits above roundoff.
inline unsigned policy_bits(double delta) {
    if (!(delta > 0)) throw ConfigError("delta must be positive");
    const double b = 10.0 * (M_PI / (2.0 * delta)) / std::log(2.0) + 64.0;
    return std::max(192u, static_cast<unsigned>(std::ceil(b)));
}

template <class R>
struct SplittingOptions {
    R seed_radius = R(1) / 1000;
    R phase0 = R(0);  // rotates the seed ring
    GlobalizeOptions<R> glob;
};

template <class R>
struct SplittingEntry {
    R mu = 0, nu = 0, delta = 0, v = 0;
    int n_sec = 0;
    unsigned bits = 0;
    R seed_radius = 0;
    std::vector<R> theta, r_u, r_s, D;
    std::vector<cplx<R>> D_hat;  // l = -(n/2-1) .. n/2-1
    R upsilon0_hat = 0;          // D_hat_0 / cosh^{2/d}(d v)
    R amp1 = 0;                  // 2 |D_hat_1|
    R phase1 = 0;                // arg D_hat_1
    R amp1_bar = 0;              // first harmonic of the radial distance in the original variables
    R reality = 0;               // max_l |D_hat_{-l} - conj(D_hat_l)|
    R fit_error = 0;             // interpolation error of both curves
    R noise = 0;                 // largest |D_hat_l| over the top quarter of the spectrum
    R error_bar = 0;             // fit_error + noise

    int half() const { return n_sec / 2 - 1; }
    const cplx<R>& mode(int l) const { return D_hat.at(static_cast<std::size_t>(l + half())); }
};

/// Both manifolds on the section, D = r^u - r^s and its Fourier modes.
template <class R>
SplittingEntry<R> measure_splitting(const UnfoldingSpec<R>& spec, const R& mu, const R& nu,
                                    const SectionSpec<R>& section, const PrecisionCtx& ctx,
                                    const SplittingOptions<R>& o = {}) {
    using std::abs;
    using std::arg;
    using std::cosh;
    using std::pow;
    using std::sqrt;
    auto sys = scale_system(spec, mu, nu);
    auto cps = critical_points(sys, ctx);
    LocalJet<R> ju(sys, cps.first), js(sys, cps.second);
    const int n = section.n_sec;
    auto cu = globalize_to_section(sys, seed_local_manifold(ju, Branch::unstable, o.seed_radius, n, o.phase0), section,
                                   ctx, o.glob);
    auto cs = globalize_to_section(sys, seed_local_manifold(js, Branch::stable, o.seed_radius, n, o.phase0), section,
                                   ctx, o.glob);
    SplittingEntry<R> e;
    e.mu = mu;
    e.nu = nu;
    e.delta = sys.params().delta;
    e.v = section.v;
    e.n_sec = n;
    e.bits = ctx.mantissa_bits();
    e.seed_radius = o.seed_radius;
    e.theta = cu.theta;
    e.r_u = cu.r;
    e.r_s = cs.r;
    std::vector<cplx<R>> grid(n), bar(n);
    e.D.resize(n);
    for (int k = 0; k < n; ++k) {
        e.D[k] = cu.r[k] - cs.r[k];
        grid[k] = e.D[k];
        bar[k] = e.delta * (sqrt(2 * cu.r[k]) - sqrt(2 * cs.r[k]));
    }
    FFTPlan<R> plan(n);
    plan.grid_to_modes(grid, e.half(), e.D_hat);
    std::vector<cplx<R>> bar_hat;
    plan.grid_to_modes(bar, e.half(), bar_hat);
    e.upsilon0_hat = e.mode(0).real() / pow(cosh(spec.d * section.v), 2 / spec.d);
    e.amp1 = 2 * abs(e.mode(1));
    e.phase1 = arg(e.mode(1));
    e.amp1_bar = 2 * abs(bar_hat[static_cast<std::size_t>(1 + e.half())]);
    for (int l = 0; l <= e.half(); ++l) {
        e.reality = std::max<R>(e.reality, abs(e.mode(-l) - std::conj(e.mode(l))));
        if (l > n / 4) e.noise = std::max<R>(e.noise, abs(e.mode(l)));
    }
    e.fit_error = cu.fit_residual + cs.fit_residual;
    e.error_bar = e.fit_error + e.noise;
    return e;
}

template <class R>
struct Nu0Options {
    R bracket = R(1);              // search nu in [-bracket mu, bracket mu]
    R rel_tol = R(1) / R(1e10);    // on nu
    int max_evals = 40;
};

template <class R>
struct Nu0Result {
    R mu = 0;
    R nu0 = 0;
    R ratio = 0;  // nu0 / mu
    int evaluations = 0;
    bool conservative = false;
    SplittingEntry<R> entry;  // measurement at nu0
};

/// Root of nu -> upsilon0_hat(mu, nu). Conservative models are measured at nu = 0 only.
template <class R>
Nu0Result<R> find_nu0(const UnfoldingSpec<R>& spec, const R& mu, const SectionSpec<R>& section,
                      const PrecisionCtx& ctx, const SplittingOptions<R>& so = {}, const Nu0Options<R>& o = {}) {
    using std::abs;
    Nu0Result<R> res;
    res.mu = mu;
    if (spec.conservative) {
        res.conservative = true;
        res.entry = measure_splitting(spec, mu, R(0), section, ctx, so);
        res.evaluations = 1;
        return res;
    }
    auto f = [&](const R& nu) {
        ++res.evaluations;
        return measure_splitting(spec, mu, nu, section, ctx, so).upsilon0_hat;
    };
    R a = -o.bracket * mu, b = o.bracket * mu;
    R fa = f(a), fb = f(b);
    if ((fa > 0) == (fb > 0)) throw NumericalError("nu0 search: upsilon0_hat has no sign change in the bracket");
    const R tol_abs = o.rel_tol * mu;
    auto tol = [&](const R& x, const R& y) { return abs(x - y) <= tol_abs; };
    std::uintmax_t iters = static_cast<std::uintmax_t>(o.max_evals);
    auto root = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    res.nu0 = (root.first + root.second) / 2;
    res.ratio = res.nu0 / mu;
    res.entry = measure_splitting(spec, mu, res.nu0, section, ctx, so);
    ++res.evaluations;
    return res;
}

}  // namespace sslab

#endif
