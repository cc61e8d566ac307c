#ifndef SSLAB_STOKES_DIFFERENCE_HPP
#define SSLAB_STOKES_DIFFERENCE_HPP

#include "sslab/inner/solver.hpp"
#include "sslab/numerics/extrapolate.hpp"
#include "sslab/numerics/rules.hpp"

#include <cmath>
#include <memory>
#include <vector>

namespace sslab {

/// Delta psi = psi^u - psi^s on a common path in E_in, with the coefficients of the linear
/// equation L(Delta psi) = a1 Delta psi + a2 d_s Delta psi + (c/s + a3) d_theta Delta psi.
template <class R>
struct DifferenceField {
    std::shared_ptr<const PanelPath<R>> path;
    R alpha = 0, d = 1, c = 0;
    FourierOnPath<R> delta_psi, d_delta_psi;
    FourierOnPath<R> sum_psi;  // psi^u + psi^s, kept for diagnostics
    FourierOnPath<R> a1, a2, a3, a2_bar;
    R residual = 0;  // max of |residual| / |Delta psi| over nodes where Delta psi is resolved
};

/// True when s lies in D_in^u, D_in^s and the lower half plane.
template <class R>
bool in_E_in(const cplx<R>& s, const R& beta0, const R& rho_in) {
    InnerDomainSpec<R> u{beta0, rho_in, Branch::unstable};
    InnerDomainSpec<R> st{beta0, rho_in, Branch::stable};
    return s.imag() < 0 && u.contains(s) && st.contains(s);
}

namespace detail {

template <class R>
bool same_nodes(const PanelPath<R>& a, const PanelPath<R>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.s[i] != b.s[i]) return false;
    return true;
}

}  // namespace detail

/// Forms Delta psi on the common ray leg of two inner solutions and the mean-value
/// coefficients a1, a2, a3 with an n-point Gauss rule in lambda.
template <class R>
DifferenceField<R> difference_and_coefficients(const InnerNonlinearity<R>& nl, const InnerSolution<R>& su,
                                               const InnerSolution<R>& ss, int gauss_points = 8) {
    using C = cplx<R>;
    using std::abs;
    if (su.branch != Branch::unstable || ss.branch != Branch::stable)
        throw ConfigError("difference needs the unstable and the stable inner solution");
    const auto& lu = su.ray();
    const auto& ls = ss.ray();
    if (!detail::same_nodes(*lu.path, *ls.path)) throw ConfigError("inner solutions live on different paths");
    for (const auto& s : lu.path->s)
        if (!in_E_in(s, su.domain.beta0, std::max<R>(su.domain.rho_in, ss.domain.rho_in)))
            throw ConfigError("difference path leaves E_in");
    const auto& sp = nl.spec();
    const int N = su.N;
    DifferenceField<R> df;
    df.path = lu.path;
    df.alpha = sp.alpha0;
    df.d = sp.d;
    df.c = sp.c();
    df.delta_psi = lu.psi - ls.psi;
    df.d_delta_psi = lu.dpsi - ls.dpsi;
    df.sum_psi = lu.psi + ls.psi;
    df.a1 = df.a2 = df.a3 = FourierOnPath<R>(df.path, N);

    ThetaGrid<R> tg(N);
    const int M = tg.size();
    GaussRule<R> gl(gauss_points);
    std::vector<C> ct(M), st(M);
    using std::cos;
    using std::sin;
    for (int j = 0; j < M; ++j) {
        ct[j] = C(cos(tg.theta(j)));
        st[j] = C(sin(tg.theta(j)));
    }
    const R k = (sp.d + 1) / sp.b;
    const R half(R(1) / 2);
    for (std::size_t i = 0; i < df.path->size(); ++i) {
        const C s = df.path->s[i];
        const C is = C(1) / s, s2 = s * s;
        auto pu = tg.values(lu.psi, i), ps = tg.values(ls.psi, i);
        auto tu = tg.theta_derivative(lu.psi, i), ts = tg.theta_derivative(ls.psi, i);
        auto du = tg.values(lu.dpsi, i), ds = tg.values(ls.dpsi, i);
        std::vector<C> g1(M), g2(M), g3(M);
        for (int j = 0; j < M; ++j) {
            const C pm = (pu[j] + ps[j]) * half, pd = (pu[j] - ps[j]) * half;
            const C tm = (tu[j] + ts[j]) * half, td = (tu[j] - ts[j]) * half;
            const C dm = (du[j] + ds[j]) * half, dd = (du[j] - ds[j]) * half;
            C iF(0), iH(0), iGt(0), iHs(0), H(0), G(0);
            for (int q = 0; q < gauss_points; ++q) {
                const R lam = gl.x[q], w = gl.w[q];
                auto t = nl.eval_cs(pm + lam * pd, s, ct[j], st[j], R(0), R(0), true);
                iF += w * t.dF;
                iH += w * t.dH;
                iGt += w * t.dG * (tm + lam * td);
                iHs += w * t.dH * (dm + lam * dd);
                H += w * t.H;
                G += w * t.G;
            }
            g1[j] = half * iF + half * k * is * iH - half * iGt + sp.b * s2 * (du[j] + ds[j]) + half * s2 * iHs;
            g2[j] = sp.b * s2 * (pu[j] + ps[j]) + half * s2 * H;
            g3[j] = -half * G;
        }
        tg.to_modes(std::move(g1), df.a1.c[i]);
        tg.to_modes(std::move(g2), df.a2.c[i]);
        tg.to_modes(std::move(g3), df.a3.c[i]);
    }
    df.a2_bar = df.a2;

    // Residual of the linear equation with independent spectral differentiation.
    auto Ld = apply_L(df.delta_psi, df.alpha, df.d);
    auto dsd = differentiate(df.delta_psi);
    R worst = 0;
    using std::sqrt;
    const R noise = sqrt(epsilon_of<R>());
    for (std::size_t i = 0; i < df.path->size(); ++i) {
        // only where Delta psi stands well above the rounding level of psi^u, psi^s
        const R nrm = df.delta_psi.norm_at(i);
        if (!(nrm > noise * df.sum_psi.norm_at(i))) continue;
        const C s = df.path->s[i];
        auto v = tg.values(df.delta_psi, i), vt = tg.theta_derivative(df.delta_psi, i), vs = tg.values(dsd, i);
        auto A1 = tg.values(df.a1, i), A2 = tg.values(df.a2, i), A3 = tg.values(df.a3, i);
        std::vector<C> rhs(M);
        for (int j = 0; j < M; ++j) rhs[j] = A1[j] * v[j] + A2[j] * vs[j] + (df.c / s + A3[j]) * vt[j];
        std::vector<C> rm;
        tg.to_modes(std::move(rhs), rm);
        R acc = 0;
        for (int l = -N; l <= N; ++l) acc += abs(Ld.at(i, l) - rm[l + N]);
        worst = std::max<R>(worst, acc / nrm);
    }
    df.residual = worst;
    return df;
}

template <class R>
struct L0Estimate {
    cplx<R> a0;
    cplx<R> L0;
    R error = 0;  // extrapolation error indicator for L0
    std::vector<std::pair<R, cplx<R>>> samples;  // (1/|s|, s a2^[0](s))
};

namespace detail {

/// Indices of `count` path nodes spread evenly (or geometrically) in |Im s| over [y_lo, y_hi],
/// ordered by increasing depth.
template <class R>
std::vector<std::size_t> sample_nodes(const PanelPath<R>& P, const R& y_lo, const R& y_hi, int count,
                                      bool geometric = false) {
    using std::abs;
    using std::pow;
    std::vector<std::size_t> out;
    for (int k = 0; k < count; ++k) {
        const R f = R(k) / R(count - 1);
        R target = geometric ? y_lo * pow(y_hi / y_lo, f) : y_lo + (y_hi - y_lo) * f;
        std::size_t best = 0;
        R bd = -1;
        for (std::size_t i = 0; i < P.size(); ++i) {
            R dist = abs(-P.s[i].imag() - target);
            if (bd < 0 || dist < bd) {
                bd = dist;
                best = i;
            }
        }
        if (out.empty() || best != out.back()) out.push_back(best);
    }
    return out;
}

}  // namespace detail

/// a0 = lim s a2^[0](s) along the path (extrapolated in 1/|s| with p = 1) and L0 = a0/d.
/// Samples are spread geometrically over |Im s| in [y_lo, y_hi].
template <class R>
L0Estimate<R> compute_L0(const DifferenceField<R>& df, const R& y_lo, const R& y_hi, int samples = 6) {
    using std::abs;
    L0Estimate<R> e;
    for (std::size_t i : detail::sample_nodes(*df.path, y_lo, y_hi, samples, true)) {
        const auto s = df.path->s[i];
        e.samples.emplace_back(R(1) / abs(s), s * df.a2.at(i, 0));
    }
    if (e.samples.size() < 3) throw NumericalError("compute_L0: path too short for extrapolation");
    auto lim = extrapolate_limit(e.samples, R(1));
    e.a0 = lim.value;
    e.L0 = lim.value / df.d;
    e.error = lim.error / df.d;
    if (!is_finite(e.a0)) throw NumericalError("compute_L0: extrapolation diverged");
    return e;
}

/// Sets a2_bar = a2 - d L0 / s (mean mode only).
template <class R>
void set_a2_bar(DifferenceField<R>& df, const cplx<R>& L0) {
    df.a2_bar = df.a2;
    for (std::size_t i = 0; i < df.path->size(); ++i) df.a2_bar.at(i, 0) -= df.d * L0 / df.path->s[i];
}

}  // namespace sslab

#endif
