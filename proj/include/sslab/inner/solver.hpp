#ifndef SSLAB_INNER_SOLVER_HPP
#define SSLAB_INNER_SOLVER_HPP

#include "sslab/inner/fourier_path.hpp"
#include "sslab/inner/operators.hpp"
#include "sslab/inner/right_inverse.hpp"
#include "sslab/model/inner_nonlinearities.hpp"
#include "sslab/numerics/fit.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sslab {

enum class Branch { unstable, stable };

inline const char* branch_name(Branch b) { return b == Branch::unstable ? "unstable" : "stable"; }

/// D_in^u = {|Im s| >= tan(beta0) Re s + rho_in}, D_in^s = -D_in^u.
template <class R>
struct InnerDomainSpec {
    R beta0 = R(1) / 4;
    R rho_in = R(8);
    Branch branch = Branch::unstable;

    void validate() const {
        if (!(beta0 > 0) || !(beta0 < pi<R>() / 2)) throw ConfigError("beta0 must lie in (0, pi/2)");
        if (!(rho_in > 0)) throw ConfigError("rho_in must be positive");
    }

    bool contains(const cplx<R>& s) const {
        using std::abs;
        using std::tan;
        const R re = branch == Branch::unstable ? s.real() : -s.real();
        return abs(s.imag()) >= tan(beta0) * re + rho_in;
    }
};

template <class R>
struct InnerOptions {
    int N = 16;
    R reach_factor = R(400);  // horizontal legs start at distance reach_factor * rho_in
    R margin = R(0);          // horizontal line at Im s = -(rho_in + margin)
    R x_end = R(0);           // end abscissa of the main horizontal leg
    R tol = R(0);             // stop when sup |s|^3 sum_l |correction_l| < tol; 0 selects 1e5 eps
    int max_iter = 80;
    int min_iter = 2;
    R overflow_limit = R(1) / R(1e4);
    bool require_contraction = true;
    PathOptions<R> path;
};

/// One leg of an inner solve: either a horizontal line coming from the tail, or a
/// finite segment whose modes are fed from two horizontal legs at its ends.
template <class R>
struct InnerLeg {
    std::shared_ptr<const PanelPath<R>> path;
    std::shared_ptr<ModeSolver<R>> solver;
    bool segment = false;
    int top = -1, bottom = -1;  // source legs feeding the segment's start and end
    FourierOnPath<R> psi, dpsi, phi, psi1;
};

template <class R>
struct InnerSolution {
    Branch branch = Branch::unstable;
    InnerDomainSpec<R> domain;
    int N = 0;
    std::vector<InnerLeg<R>> legs;  // legs[0] is the main horizontal leg
    std::vector<R> corrections;     // weighted sup norm of successive corrections
    std::vector<R> ratios;
    R overflow = R(0);
    int iterations = 0;
    R residual = R(0);              // sup |s|^4 sum_l |L psi - M psi| on the main leg

    const FourierOnPath<R>& psi() const { return legs[0].psi; }
    const InnerLeg<R>& ray() const { return legs.back(); }
};

namespace detail {

template <class R>
R leg_weighted_diff(const FourierOnPath<R>& a, const FourierOnPath<R>& b, const R& n) {
    using std::abs;
    using std::pow;
    R m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        R acc = 0;
        for (int l = -a.N; l <= a.N; ++l) acc += abs(a.at(i, l) - b.at(i, l));
        R v = pow(abs(a.s(i)), n) * acc;
        if (v > m) m = v;
    }
    return m;
}

template <class R>
void apply_G_leg(InnerLeg<R>& leg, const std::vector<InnerLeg<R>>& legs, FourierOnPath<R>& out) {
    const auto& ms = *leg.solver;
    out = FourierOnPath<R>(leg.path, leg.phi.N, leg.phi.strip);
    if (!leg.segment) {
        for (int l = -out.N; l <= out.N; ++l) ms.propagate(l, leg.phi, true, ms.tail_value(l, leg.phi), out);
    } else {
        // modes l < 0 descend from the top corner, l >= 0 climb from the bottom corner
        const auto& top = legs[leg.top].psi;
        const auto& bot = legs[leg.bottom].psi;
        for (int l = -out.N; l <= out.N; ++l) {
            if (l < 0)
                ms.propagate(l, leg.phi, true, top.at(top.size() - 1, l), out);
            else
                ms.propagate(l, leg.phi, false, bot.at(bot.size() - 1, l), out);
        }
    }
}

}  // namespace detail

/// Fixed-point iteration psi <- G(M(psi, 0)) on a set of legs.
template <class R>
InnerSolution<R> solve_inner_legs(const InnerNonlinearity<R>& nl, const InnerDomainSpec<R>& dom,
                                  std::vector<InnerLeg<R>> legs, const InnerOptions<R>& o) {
    using std::abs;
    const auto& sp = nl.spec();
    MEvaluator<R> ev(nl, o.N);
    const R tol = o.tol > 0 ? o.tol : R(100000) * epsilon_of<R>();
    InnerSolution<R> sol;
    sol.branch = dom.branch;
    sol.domain = dom;
    sol.N = o.N;
    for (auto& leg : legs) {
        if (!leg.solver) leg.solver = std::make_shared<ModeSolver<R>>(leg.path, sp.alpha0, sp.d, 2);
        leg.psi = FourierOnPath<R>(leg.path, o.N);
        leg.dpsi = leg.psi;
        leg.phi = leg.psi;
    }
    // Horizontal legs first: segments read their corner values.
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < legs.size(); ++k)
        if (!legs[k].segment) order.push_back(k);
    for (std::size_t k = 0; k < legs.size(); ++k)
        if (legs[k].segment) order.push_back(k);

    for (int it = 1; it <= o.max_iter; ++it) {
        for (auto& leg : legs) {
            auto m = apply_M(leg.psi, leg.dpsi, R(0), R(0), ev);
            leg.phi = std::move(m.value);
            if (m.overflow > sol.overflow) sol.overflow = m.overflow;
        }
        if (sol.overflow > o.overflow_limit)
            throw NumericalError("inner solver: Fourier mode window overflow (" + to_sci(sol.overflow, 3) +
                                 "); increase N_theta");
        std::vector<FourierOnPath<R>> fresh(legs.size());
        for (std::size_t k : order) {
            detail::apply_G_leg(legs[k], legs, fresh[k]);
            // segments must see the new corner values of the legs computed before them
            std::swap(legs[k].psi, fresh[k]);
        }
        R corr = 0;
        for (std::size_t k = 0; k < legs.size(); ++k) {
            auto& leg = legs[k];
            corr = std::max<R>(corr, detail::leg_weighted_diff(leg.psi, fresh[k], R(3)));
            for (std::size_t i = 0; i < leg.psi.size(); ++i)
                for (int l = -o.N; l <= o.N; ++l)
                    leg.dpsi.at(i, l) = leg.solver->derivative(l, leg.psi.s(i), leg.psi.at(i, l), leg.phi.at(i, l));
            if (it == 1) leg.psi1 = leg.psi;
        }
        sol.corrections.push_back(corr);
        sol.iterations = it;
        if (it >= 2) {
            const R& prev = sol.corrections[sol.corrections.size() - 2];
            R ratio = prev > 0 ? corr / prev : R(0);
            sol.ratios.push_back(ratio);
            if (o.require_contraction && ratio >= 1 && corr > 100 * tol)
                throw NumericalError("inner solver: no contraction (correction ratio " + to_sci(ratio, 3) +
                                     "); enlarge rho_in");
            if (ratio > R(9) / 10 && corr < 100 * tol) break;  // rounding floor
        }
        if (!is_finite(corr)) throw NumericalError("inner solver: non-finite iterate");
        if (it >= o.min_iter && corr < tol) break;
        if (it == o.max_iter) {
            if (o.require_contraction)
                throw NumericalError("inner solver: tolerance not reached in " + std::to_string(o.max_iter) +
                                     " iterations (last correction " + to_sci(corr, 3) + ")");
        }
    }
    // Residual of the PDE on the main leg, with independent spectral differentiation.
    {
        const auto& leg = legs[0];
        auto Lpsi = apply_L(leg.psi, sp.alpha0, sp.d);
        auto Mpsi = apply_M(leg.psi, R(0), R(0), ev).value;
        sol.residual = detail::leg_weighted_diff(Lpsi, Mpsi, R(4));
    }
    sol.legs = std::move(legs);
    return sol;
}

template <class R>
std::shared_ptr<const PanelRule<R>> shared_rule(int n) {
    return std::make_shared<const PanelRule<R>>(n);
}

template <class R>
InnerLeg<R> horizontal_leg(const cplx<R>& end, Branch b, const R& reach, const InnerOptions<R>& o,
                           std::shared_ptr<const PanelRule<R>> rule) {
    InnerLeg<R> leg;
    leg.path = std::make_shared<const PanelPath<R>>(
        make_horizontal_path<R>(end, b == Branch::unstable ? -1 : 1, reach, o.path, std::move(rule)));
    return leg;
}

/// psi_in^u or psi_in^s on the horizontal line Im s = -(rho_in + margin).
template <class R>
InnerSolution<R> solve_inner(const InnerNonlinearity<R>& nl, const InnerDomainSpec<R>& dom, const InnerOptions<R>& o) {
    dom.validate();
    auto rule = shared_rule<R>(o.path.nodes_per_panel);
    const R sign = dom.branch == Branch::unstable ? R(1) : R(-1);
    cplx<R> end(sign * o.x_end, -(dom.rho_in + o.margin));
    if (!dom.contains(end)) throw ConfigError("inner path end point lies outside the inner domain");
    std::vector<InnerLeg<R>> legs{horizontal_leg(end, dom.branch, o.reach_factor * dom.rho_in, o, rule)};
    return solve_inner_legs(nl, dom, std::move(legs), o);
}

/// psi_in on the segment top -> bottom (both in the domain, Im bottom < Im top < 0),
/// with horizontal legs feeding the segment corners. With uniform > 0 the panels are
/// uniform only over that length from the top and grow geometrically below.
template <class R>
InnerSolution<R> solve_inner_ray(const InnerNonlinearity<R>& nl, const InnerDomainSpec<R>& dom, const cplx<R>& top,
                                 const cplx<R>& bottom, const InnerOptions<R>& o, const R& uniform = R(0)) {
    dom.validate();
    if (!dom.contains(top) || !dom.contains(bottom)) throw ConfigError("ray end points must lie in the inner domain");
    if (!(bottom.imag() < top.imag())) throw ConfigError("ray must descend");
    auto rule = shared_rule<R>(o.path.nodes_per_panel);
    const R reach = o.reach_factor * dom.rho_in;
    std::vector<InnerLeg<R>> legs;
    legs.push_back(horizontal_leg(top, dom.branch, reach, o, rule));
    legs.push_back(horizontal_leg(bottom, dom.branch, reach, o, rule));
    InnerLeg<R> seg;
    seg.path = std::make_shared<const PanelPath<R>>(
        uniform > 0 ? make_ray_path<R>(top, bottom, uniform, o.path, rule) : make_segment_path<R>(top, bottom, o.path, rule));
    seg.segment = true;
    seg.top = 0;
    seg.bottom = 1;
    legs.push_back(std::move(seg));
    return solve_inner_legs(nl, dom, std::move(legs), o);
}

template <class R>
struct DecayReport {
    LineFit<R> psi;        // log ||psi(s,.)|| against log |s|
    LineFit<R> remainder;  // log ||psi - G(M(0,0))|| against log |s|
};

/// Decay fits on the main leg over |s| in [lo, hi].
template <class R>
DecayReport<R> decay_report(const InnerSolution<R>& sol, const R& lo, const R& hi) {
    using std::abs;
    using std::log;
    const auto& leg = sol.legs[0];
    std::vector<R> x, y1, y2;
    auto rem = leg.psi - leg.psi1;
    for (std::size_t i = 0; i < leg.psi.size(); ++i) {
        R a = abs(leg.psi.s(i));
        if (a < lo || a > hi) continue;
        R n1 = leg.psi.norm_at(i), n2 = rem.norm_at(i);
        if (!(n1 > 0) || !(n2 > 0)) continue;
        x.push_back(log(a));
        y1.push_back(log(n1));
        y2.push_back(log(n2));
    }
    if (x.size() < 3) throw NumericalError("decay report: too few nodes with nonzero norm in range");
    std::vector<R> x2 = x;
    return {fit_line(x, y1), fit_line(x2, y2)};
}

/// Smallest rho_in (to within `step`) for which all correction ratios stay below `limit`,
/// found by bisection between lo and hi over a few iterations.
template <class R>
R rho_contract(const InnerNonlinearity<R>& nl, InnerDomainSpec<R> dom, InnerOptions<R> o, R lo, R hi, const R& step,
               const R& limit = R(1) / 2, int probe_iter = 6) {
    o.max_iter = probe_iter;
    o.require_contraction = false;
    o.tol = R(0);
    o.min_iter = probe_iter;
    auto passes = [&](const R& rho) {
        dom.rho_in = rho;
        try {
            auto sol = solve_inner(nl, dom, o);
            const R floor = R(1000000) * epsilon_of<R>();
            for (std::size_t k = 0; k < sol.ratios.size(); ++k)
                if (sol.corrections[k + 1] > floor && !(sol.ratios[k] < limit)) return false;
            return true;
        } catch (const NumericalError&) {
            return false;
        }
    };
    if (!passes(hi)) throw NumericalError("rho_contract: no contraction even at rho_in = " + to_sci(hi, 6));
    if (passes(lo)) return lo;
    while (hi - lo > step) {
        R mid = (lo + hi) / 2;
        if (passes(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace sslab

#endif
