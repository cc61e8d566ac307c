#ifndef SSLAB_NUMERICS_QUADRATURE_HPP
#define SSLAB_NUMERICS_QUADRATURE_HPP

#include "sslab/numerics/complex_path.hpp"
#include "sslab/numerics/rules.hpp"

#include <functional>
#include <string>

namespace sslab {

namespace detail {

template <class R>
int gauss_order_for() {
    if constexpr (is_mp_v<R>) {
        return 32;
    } else {
        return 16;
    }
}

template <class R>
struct SegmentIntegrator {
    const std::function<cplx<R>(const cplx<R>&)>& f;
    const GaussRule<R>& rule;
    R abs_tol;
    R rel_tol;
    int max_depth = 40;

    cplx<R> gauss(const cplx<R>& a, const cplx<R>& b) const {
        cplx<R> mid = (a + b) / R(2);
        cplx<R> half = (b - a) / R(2);
        cplx<R> acc(0);
        for (int i = 0; i < rule.size(); ++i) {
            cplx<R> v = f(mid + half * rule.x[i]);
            if (!is_finite(v)) throw NumericalError("quadrature: non-finite integrand sample");
            acc += v * rule.w[i];
        }
        return acc * half;
    }

    cplx<R> adapt(const cplx<R>& a, const cplx<R>& b, const cplx<R>& whole, int depth, R tol) const {
        using std::abs;
        cplx<R> m = (a + b) / R(2);
        cplx<R> left = gauss(a, m);
        cplx<R> right = gauss(m, b);
        cplx<R> both = left + right;
        if (abs(both - whole) <= tol || depth >= max_depth) {
            if (depth >= max_depth && abs(both - whole) > tol)
                throw NumericalError("quadrature: maximum subdivision depth reached");
            return both;
        }
        return adapt(a, m, left, depth + 1, tol / R(2)) + adapt(m, b, right, depth + 1, tol / R(2));
    }

    cplx<R> run(const cplx<R>& a, const cplx<R>& b) const {
        using std::abs;
        cplx<R> whole = gauss(a, b);
        R tol = abs_tol + rel_tol * abs(whole);
        return adapt(a, b, whole, 0, tol);
    }
};

}  // namespace detail

/// Integral of f along the path (in node order). A tail contributes the integral from
/// infinity to the first node (Tail::at_start) or from the last node to infinity
/// (Tail::at_end), evaluated after the substitution tau = 1/t - T that maps the ray
/// w = P + tau*dir onto t in (0, 1/T].
template <class R>
cplx<R> quadrature_path(const std::function<cplx<R>(const cplx<R>&)>& f, const ComplexPath<R>& path,
                        const R& decay_order, const PrecisionCtx& ctx) {
    using std::abs;
    using std::pow;
    path.validate_nodes();
    const GaussRule<R> rule(detail::gauss_order_for<R>());
    const R atol = R(ctx.abs_tol());
    const R rtol = R(ctx.rel_tol());
    detail::SegmentIntegrator<R> seg{f, rule, atol, rtol};

    cplx<R> total(0);
    for (std::size_t i = 1; i < path.nodes.size(); ++i) total += seg.run(path.nodes[i - 1], path.nodes[i]);

    if (path.tail == Tail::none) return total;
    if (!(decay_order > 1)) throw NumericalError("quadrature: tail requires decay order > 1");

    const cplx<R> P = path.tail == Tail::at_start ? path.nodes.front() : path.nodes.back();
    const cplx<R> dir = path.tail_dir;
    const R T = abs(P) > 1 ? R(abs(P)) : R(1);
    // Integrand in t: f(P + (1/t - T) dir) * dir / t^2 on (0, 1/T].
    std::function<cplx<R>(const cplx<R>&)> g = [&](const cplx<R>& tc) {
        R t = tc.real();
        return f(P + dir * (R(1) / t - T)) * dir / (t * t);
    };
    detail::SegmentIntegrator<R> tseg{g, rule, atol, rtol};
    cplx<R> tail_sum(0);
    R hi = R(1) / T;
    // Geometric panels toward t=0; the integrand behaves like t^(decay-2) there.
    for (int k = 0; k < 4000; ++k) {
        R lo = hi / 2;
        cplx<R> piece = tseg.run(cplx<R>(lo), cplx<R>(hi));
        tail_sum += piece;
        hi = lo;
        // Remaining part bounded by a power-law model fitted to the last panel.
        R rest = abs(piece) / (pow(R(2), decay_order - 1) - 1);
        if (rest <= (atol + rtol * abs(total + tail_sum)) / 4) break;
        if (k == 3999) throw NumericalError("quadrature: tail did not converge");
    }
    if (path.tail == Tail::at_start) tail_sum = -tail_sum;
    return total + tail_sum;
}

}  // namespace sslab

#endif
