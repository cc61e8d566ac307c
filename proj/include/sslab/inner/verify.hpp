#ifndef SSLAB_INNER_VERIFY_HPP
#define SSLAB_INNER_VERIFY_HPP

#include "sslab/inner/solver.hpp"

#include <cmath>
#include <random>

namespace sslab {

/// max over nodes of |L(k)| / |k| for k = s^{2/d} e^{sign i l alpha s/d} e^{i l theta} on a
/// finely paneled segment a -> b (sign = +1 gives the kernel of L).
template <class R>
R kernel_residual(const R& alpha, const R& d, int l, int sign, const cplx<R>& a, const cplx<R>& b) {
    using C = cplx<R>;
    using std::abs;
    PathOptions<R> po;
    po.seg_h_max = R(1);
    auto path = std::make_shared<const PanelPath<R>>(make_segment_path<R>(a, b, po, shared_rule<R>(40)));
    const int N = std::abs(l) + 1;
    FourierOnPath<R> k(path, N);
    for (std::size_t i = 0; i < k.size(); ++i) {
        const C s = k.s(i);
        k.at(i, l) = std::pow(s, C(R(2) / d)) * std::exp(C(0, sign * l) * alpha * s / d);
    }
    auto Lk = apply_L(k, alpha, d);
    R worst = 0;
    for (std::size_t i = 0; i < k.size(); ++i) worst = std::max<R>(worst, Lk.norm_at(i) / k.norm_at(i));
    return worst;
}

/// phi^[l](s) = sum_{k=order}^{order+2} c_{l,k} s^-k with pseudo-random c in the unit square,
/// on the given path.
template <class R>
FourierOnPath<R> random_decaying(std::shared_ptr<const PanelPath<R>> path, int N, int order, unsigned seed) {
    using C = cplx<R>;
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FourierOnPath<R> f(path, N);
    for (int l = -N; l <= N; ++l)
        for (int k = order; k <= order + 2; ++k) {
            const C c(R(u(gen)), R(u(gen)));
            for (std::size_t i = 0; i < f.size(); ++i) f.at(i, l) += c * std::pow(f.s(i), C(R(-k)));
        }
    return f;
}

template <class R>
struct BatteryResult {
    R worst = 0;  // max over cases of sup_i |s|^order ||L G phi - phi|| / sup_i |s|^order ||phi||
    int cases = 0;
};

/// Right-inverse identity L(G(phi)) = phi for decay orders 2..6 and modes |l| <= N on the
/// horizontal unstable path at Im s = -rho.
template <class R>
BatteryResult<R> right_inverse_battery(const R& alpha, const R& d, const R& rho, int N = 8, unsigned seed = 7) {
    InnerOptions<R> o;
    auto rule = shared_rule<R>(o.path.nodes_per_panel);
    auto path = std::make_shared<const PanelPath<R>>(
        make_horizontal_path<R>(cplx<R>(0, -rho), -1, o.reach_factor * rho, o.path, rule));
    ModeSolver<R> ms(path, alpha, d, 2);
    BatteryResult<R> res;
    for (int order = 2; order <= 6; ++order) {
        auto phi = random_decaying<R>(path, N, order, seed + order);
        auto g = right_inverse_G(phi, ms);
        auto lg = apply_L(g, alpha, d);
        R num = detail::leg_weighted_diff(lg, phi, R(order));
        R den = phi.weighted_sup(R(order));
        res.worst = std::max<R>(res.worst, num / den);
        ++res.cases;
    }
    return res;
}

}  // namespace sslab

#endif
