#ifndef SSLAB_STOKES_EXTRACTION_HPP
#define SSLAB_STOKES_EXTRACTION_HPP

#include "sslab/stokes/difference.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sslab {

/// phi and P1 in xi = theta + alpha s/d + ((c + alpha L0)/d) log s + phi and
/// P = s^{2/d} (1 + P1), with their s-derivatives.
template <class R>
struct PhaseAmplitudeCorrections {
    FourierOnPath<R> phi, dphi;
    FourierOnPath<R> p1, dp1;
    int phi_iterations = 0, p1_iterations = 0;
    std::vector<R> phi_history, p1_history;  // sup |s| ||correction|| per iteration
    R phi_slope = 0, p1_slope = 0;  // fitted decay of the sup-norm against |s|
    R p1_max = 0;                   // max |P1| on the theta grid
    R injectivity = 0;              // min |alpha/d + d_s(kappa log s + phi)| on the theta grid
};

template <class R>
struct CorrectionOptions {
    R tol = R(0);  // on sup |s| ||correction||; 0 selects 1e5 eps
    int max_iter = 60;
    bool require_contraction = true;
};

namespace detail {

/// G_diffin on a finite descending path: modes l < 0 start from zero at the top,
/// modes l >= 0 take the asymptotic value of the solution decaying at -i infinity at the bottom.
template <class R>
void apply_G_diff(const ModeSolver<R>& ms, const FourierOnPath<R>& b, FourierOnPath<R>& u, FourierOnPath<R>& du) {
    u = FourierOnPath<R>(b.path, b.N);
    du = u;
    for (int l = -b.N; l <= b.N; ++l) {
        if (l < 0)
            ms.propagate(l, b, true, cplx<R>(0), u);
        else
            ms.propagate(l, b, false, l == 0 ? ms.mean_tail_series(b) : ms.tail_value(l, b, true), u);
    }
    for (std::size_t i = 0; i < u.size(); ++i)
        for (int l = -b.N; l <= b.N; ++l) du.at(i, l) = ms.derivative(l, u.s(i), u.at(i, l), b.at(i, l));
}

/// Fixed point u = G_diffin(f0 + A u + a2 d_s u + cth d_theta u), all coefficients as grids per node.
template <class R>
int transport_fixed_point(const ModeSolver<R>& ms, const ThetaGrid<R>& tg, const std::vector<std::vector<cplx<R>>>& f0,
                          const std::vector<std::vector<cplx<R>>>* A, const std::vector<std::vector<cplx<R>>>& a2,
                          const std::vector<std::vector<cplx<R>>>& cth, const CorrectionOptions<R>& o,
                          std::shared_ptr<const PanelPath<R>> path, FourierOnPath<R>& u, FourierOnPath<R>& du,
                          std::vector<R>& history) {
    using C = cplx<R>;
    const R tol = o.tol > 0 ? o.tol : R(100000) * epsilon_of<R>();
    const int N = tg.N(), M = tg.size();
    u = FourierOnPath<R>(path, N);
    du = u;
    R prev = -1;
    for (int it = 1; it <= o.max_iter; ++it) {
        FourierOnPath<R> b(path, N);
        for (std::size_t i = 0; i < u.size(); ++i) {
            auto g = tg.values(u, i), gs = tg.values(du, i), gt = tg.theta_derivative(u, i);
            std::vector<C> v(M);
            for (int j = 0; j < M; ++j) {
                v[j] = f0[i][j] + a2[i][j] * gs[j] + cth[i][j] * gt[j];
                if (A) v[j] += (*A)[i][j] * g[j];
            }
            tg.to_modes(std::move(v), b.c[i]);
        }
        FourierOnPath<R> nu, ndu;
        apply_G_diff(ms, b, nu, ndu);
        R corr = leg_weighted_diff(nu, u, R(1));
        u = std::move(nu);
        du = std::move(ndu);
        history.push_back(corr);
        if (!is_finite(corr)) throw NumericalError("correction equation: non-finite iterate");
        if (prev > 0) {
            R ratio = corr / prev;
            if (o.require_contraction && ratio >= 1 && corr > 100 * tol)
                throw NumericalError("correction equation: no contraction (ratio " + to_sci(ratio, 3) +
                                     " at correction " + to_sci(corr, 3) + "); enlarge rho_in");
            if (ratio > R(9) / 10 && corr < 100 * tol) return it;  // rounding floor
        }
        prev = corr;
        if (corr < tol) return it;
    }
    if (!o.require_contraction) return o.max_iter;
    throw NumericalError("correction equation: tolerance not reached in " + std::to_string(o.max_iter) +
                         " iterations");
}

template <class R>
R decay_slope(const FourierOnPath<R>& f, const R& y_lo) {
    using std::abs;
    using std::log;
    std::vector<R> x, y;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (-f.s(i).imag() < y_lo) continue;
        R n = f.norm_at(i);
        if (!(n > 0)) continue;
        x.push_back(log(abs(f.s(i))));
        y.push_back(log(n));
    }
    if (x.size() < 3) return R(0);
    return fit_line(x, y).slope;
}

}  // namespace detail

/// Solves the transport equations for phi and P1 on the path of df (descending from its top node).
template <class R>
PhaseAmplitudeCorrections<R> solve_corrections(const DifferenceField<R>& df, const cplx<R>& L0,
                                               const CorrectionOptions<R>& o = {}) {
    using C = cplx<R>;
    using std::abs;
    const int N = df.a2.N;
    ThetaGrid<R> tg(N);
    const int M = tg.size();
    const std::size_t n = df.path->size();
    const C kappa = (C(df.c) + df.alpha * L0) / df.d;
    std::vector<std::vector<C>> f_phi(n), f_p1(n), a2(n), cth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const C s = df.path->s[i];
        auto A1 = tg.values(df.a1, i), A2 = tg.values(df.a2, i), A3 = tg.values(df.a3, i);
        auto A2b = tg.values(df.a2_bar, i);
        f_phi[i].resize(M);
        f_p1[i].resize(M);
        cth[i].resize(M);
        for (int j = 0; j < M; ++j) {
            f_phi[i][j] = df.alpha / df.d * A2b[j] + kappa / s * A2[j] + A3[j];
            f_p1[i][j] = A1[j] + R(2) * A2[j] / (df.d * s);
            cth[i][j] = df.c / s + A3[j];
        }
        a2[i] = std::move(A2);
    }
    ModeSolver<R> ms(df.path, df.alpha, df.d, 0);
    PhaseAmplitudeCorrections<R> pc;
    const std::vector<std::vector<C>>* none = nullptr;
    pc.phi_iterations = detail::transport_fixed_point(ms, tg, f_phi, none, a2, cth, o, df.path, pc.phi, pc.dphi,
                                                      pc.phi_history);
    pc.p1_iterations =
        detail::transport_fixed_point(ms, tg, f_p1, &f_p1, a2, cth, o, df.path, pc.p1, pc.dp1, pc.p1_history);

    const R y_top = -df.path->s.front().imag();
    pc.phi_slope = detail::decay_slope(pc.phi, 2 * y_top);
    pc.p1_slope = detail::decay_slope(pc.p1, 2 * y_top);
    pc.injectivity = -1;
    for (std::size_t i = 0; i < n; ++i) {
        auto p = tg.values(pc.p1, i), dp = tg.values(pc.dphi, i);
        const C base = C(df.alpha / df.d) + kappa / df.path->s[i];
        for (int j = 0; j < M; ++j) {
            pc.p1_max = std::max<R>(pc.p1_max, abs(p[j]));
            R v = abs(base + dp[j]);
            if (pc.injectivity < 0 || v < pc.injectivity) pc.injectivity = v;
        }
    }
    return pc;
}

template <class R>
struct UpsilonEstimate {
    cplx<R> value;
    R error = 0;
    std::vector<std::pair<R, cplx<R>>> samples;  // (1/|s|, projection at s)
};

template <class R>
struct StokesData {
    cplx<R> a0;
    cplx<R> L0;
    R L0_error = 0;
    std::map<int, UpsilonEstimate<R>> upsilon;  // l < 0
    std::optional<cplx<R>> L_plus;
    cplx<R> c_star;
    R c_star_abs = 0;
    bool phase_fitted = true;
    // diagnostics at the deepest sample
    R positive_projection = 0;  // sum_{l >= 0} |projection l|
    R dominance = 0;            // |Upsilon^[-2] e^{2 Im xi}| / |Upsilon^[-1] e^{Im xi}|
    R y_lo = 0, y_hi = 0;       // extraction window in |Im s|
};

/// Upsilon_in^[l], l = -1..-modes, from Delta psi / (s^{2/d}(1+P1)) = sum_l Upsilon^[l] e^{i l xi}.
/// At each sample node the exact change of variables theta -> xi gives
/// Upsilon^[l](s) = <Q e^{-i l xi} d_theta xi>_theta; the s-dependence left by truncation is
/// removed by extrapolation in 1/|s| (p = 1) over nodes with |Im s| in [y_lo, y_hi].
template <class R>
StokesData<R> extract_upsilon(const DifferenceField<R>& df, const PhaseAmplitudeCorrections<R>& pc,
                              const L0Estimate<R>& L0, const R& y_lo, const R& y_hi, int modes = 2, int samples = 4) {
    using C = cplx<R>;
    using std::abs;
    using std::exp;
    using std::log;
    const int N = df.delta_psi.N;
    ThetaGrid<R> tg(N);
    const int M = tg.size();
    const C kappa = (C(df.c) + df.alpha * L0.L0) / df.d;
    const C I(0, 1);
    StokesData<R> sd;
    sd.a0 = L0.a0;
    sd.L0 = L0.L0;
    sd.L0_error = L0.error;
    sd.y_lo = y_lo;
    sd.y_hi = y_hi;
    auto nodes = detail::sample_nodes(*df.path, y_lo, y_hi, samples);
    if (nodes.size() < 3) throw NumericalError("extract_upsilon: extraction window holds too few nodes");
    std::map<int, std::vector<std::pair<R, C>>> data;
    std::vector<C> naive;  // theta modes of Q times e^{-i l (alpha s/d + kappa log s)} at the deepest node
    for (std::size_t i : nodes) {
        const C s = df.path->s[i];
        const C pw = std::pow(s, C(R(2) / df.d));
        const C lin = df.alpha * s / df.d + kappa * log(s);
        auto dp = tg.values(df.delta_psi, i), p1 = tg.values(pc.p1, i), ph = tg.values(pc.phi, i);
        auto pht = tg.theta_derivative(pc.phi, i);
        std::vector<C> q(M);
        for (int j = 0; j < M; ++j) q[j] = dp[j] / (pw * (C(1) + p1[j]));
        for (int l = -1; l >= -modes; --l) {
            C acc(0);
            for (int j = 0; j < M; ++j) {
                const C xi = C(tg.theta(j)) + lin + ph[j];
                acc += q[j] * exp(-I * R(l) * xi) * (C(1) + pht[j]);
            }
            data[l].emplace_back(R(1) / abs(s), acc / R(M));
        }
        if (i == nodes.back()) {
            std::vector<C> qm;
            tg.to_modes(q, qm);
            naive.resize(2 * N + 1);
            for (int l = -N; l <= N; ++l) naive[l + N] = qm[l + N] * exp(-I * R(l) * lin);
        }
    }
    for (auto& [l, smp] : data) {
        UpsilonEstimate<R> e;
        e.samples = smp;
        auto lim = extrapolate_limit(smp, R(1));
        e.value = lim.value;
        e.error = lim.error;
        sd.upsilon[l] = std::move(e);
    }
    for (int l = 0; l <= N; ++l) sd.positive_projection += abs(naive[l + N]);
    if (modes >= 2) {
        const C s = df.path->s[nodes.back()];
        const R im_xi = (df.alpha * s / df.d + kappa * log(s)).imag();
        const R a1 = abs(sd.upsilon[-1].value) * exp(im_xi);
        const R a2 = abs(sd.upsilon[-2].value) * exp(2 * im_xi);
        sd.dominance = a1 > 0 ? a2 / a1 : R(0);
    }
    return sd;
}

template <class R>
struct CStar {
    cplx<R> value;  // valid when phase_fitted is false
    R modulus = 0;
    bool phase_fitted = true;
};

/// C* = 2 (-i)^{2/d} Upsilon^[-1] e^{-(c + alpha L0) pi/(2d) + i alpha L+}. Without L+ only
/// |C*| = 2 |Upsilon^[-1]| e^{-(c + Re(alpha L0)) pi/(2d)} is determined.
template <class R>
CStar<R> assemble_c_star(const cplx<R>& upsilon_m1, const cplx<R>& L0, const std::optional<cplx<R>>& L_plus,
                         const R& alpha, const R& c, const R& d) {
    using C = cplx<R>;
    using std::abs;
    using std::exp;
    CStar<R> out;
    const C kappa_pi = (C(c) + alpha * L0) * pi<R>() / (2 * d);
    out.modulus = 2 * abs(upsilon_m1) * exp(-kappa_pi.real());
    if (L_plus) {
        const C I(0, 1);
        out.value = R(2) * std::pow(-I, C(R(2) / d)) * upsilon_m1 * std::exp(-kappa_pi + I * alpha * *L_plus);
        out.modulus = abs(out.value);
        out.phase_fitted = false;
    } else {
        out.value = C(out.modulus);
    }
    return out;
}

/// Structured text report of a Stokes extraction.
template <class R>
std::string stokes_report(const StokesData<R>& sd) {
    std::ostringstream os;
    auto cs = [](const cplx<R>& z) { return to_sci(z.real(), 15) + " " + to_sci(z.imag(), 15); };
    os << "a0 " << cs(sd.a0) << "\n";
    os << "L0 " << cs(sd.L0) << " error " << to_sci(sd.L0_error, 3) << "\n";
    os << "window " << to_sci(sd.y_lo, 6) << " " << to_sci(sd.y_hi, 6) << "\n";
    for (auto it = sd.upsilon.rbegin(); it != sd.upsilon.rend(); ++it)
        os << "upsilon " << it->first << " " << cs(it->second.value) << " error " << to_sci(it->second.error, 3)
           << "\n";
    os << "positive_projection " << to_sci(sd.positive_projection, 3) << "\n";
    os << "dominance " << to_sci(sd.dominance, 3) << "\n";
    os << "c_star_abs " << to_sci(sd.c_star_abs, 15) << "\n";
    if (!sd.phase_fitted) os << "c_star " << cs(sd.c_star) << "\n";
    else os << "c_star phase_fitted\n";
    return os.str();
}

}  // namespace sslab

#endif
