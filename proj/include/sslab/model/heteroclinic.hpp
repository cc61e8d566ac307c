#ifndef SSLAB_MODEL_HETEROCLINIC_HPP
#define SSLAB_MODEL_HETEROCLINIC_HPP

#include "sslab/model/unfolding.hpp"

#include <complex>

namespace sslab {

template <class R>
struct HeteroclinicPoint {
    cplx<R> t, r, theta, z;
};

/// Point of the unperturbed two-dimensional heteroclinic manifold at (complex) time t.
/// alpha defaults to alpha(delta^2, 0).
template <class R>
HeteroclinicPoint<R> heteroclinic(const cplx<R>& t, const cplx<R>& theta0, const UnfoldingSpec<R>& spec,
                                  const R& delta, const R* alpha = nullptr) {
    using std::abs;
    const R a = alpha ? *alpha : spec.alpha_of(delta, R(0));
    cplx<R> ch = std::cosh(spec.d * t);
    if (!is_finite(ch) || abs(ch) < R(64) * epsilon_of<R>())
        throw NumericalError("heteroclinic evaluated at a singularity of sech");
    cplx<R> th = std::sinh(spec.d * t) / ch;
    HeteroclinicPoint<R> p;
    p.t = t;
    p.r = (spec.d + 1) / (2 * spec.b) / (ch * ch);
    p.theta = theta0 - (a / delta) * t - (spec.c() / spec.d) * std::log(ch);
    p.z = th;
    return p;
}

/// R0(u) = (d+1)/(2b) sech^2(d u)
template <class R>
cplx<R> het_r0(const cplx<R>& u, const UnfoldingSpec<R>& spec) {
    cplx<R> ch = std::cosh(spec.d * u);
    return (spec.d + 1) / (2 * spec.b) / (ch * ch);
}

}  // namespace sslab

#endif
