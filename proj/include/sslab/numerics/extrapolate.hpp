#ifndef SSLAB_NUMERICS_EXTRAPOLATE_HPP
#define SSLAB_NUMERICS_EXTRAPOLATE_HPP

#include "sslab/numerics/precision.hpp"

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include <utility>
#include <vector>

namespace sslab {

template <class R>
struct LimitEstimate {
    cplx<R> value;
    R error;  // |last stage - previous stage|
    std::vector<cplx<R>> stages;
};

namespace detail {

// Exact fit of v = v0 + sum_{j<m} c_j x^(p+j) through the given samples; returns v0.
template <class R>
cplx<R> fit_limit(const std::vector<std::pair<R, cplx<R>>>& s, const R& p) {
    using std::pow;
    const int n = static_cast<int>(s.size());
    using Mat = Eigen::Matrix<cplx<R>, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<cplx<R>, Eigen::Dynamic, 1>;
    // Columns scaled by the largest x so the system stays well conditioned.
    R xs = s.front().first;
    Mat A(n, n);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
        R xi = s[i].first / xs;
        A(i, 0) = cplx<R>(1);
        for (int j = 1; j < n; ++j) A(i, j) = cplx<R>(pow(xi, p + R(j - 1)));
        b(i) = s[i].second;
    }
    Vec c = A.fullPivLu().solve(b);
    return c(0);
}

}  // namespace detail

/// Richardson-type limit of value(x) as x -> 0 assuming value = v0 + O(x^p) with an
/// expansion in x^p, x^(p+1), ... Stage k uses the last k+1 samples.
template <class R>
LimitEstimate<R> extrapolate_limit(const std::vector<std::pair<R, cplx<R>>>& samples, const R& p) {
    using std::abs;
    if (samples.size() < 3) throw NumericalError("extrapolation needs at least 3 samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].first < samples[i - 1].first) || !(samples[i].first > 0))
            throw NumericalError("extrapolation samples must have strictly decreasing positive x");
    LimitEstimate<R> out;
    const std::size_t n = samples.size();
    for (std::size_t k = 1; k < n; ++k) {
        std::vector<std::pair<R, cplx<R>>> tail(samples.end() - static_cast<long>(k + 1), samples.end());
        out.stages.push_back(detail::fit_limit(tail, p));
    }
    out.value = out.stages.back();
    out.error = abs(out.stages[out.stages.size() - 1] - out.stages[out.stages.size() - 2]);
    return out;
}

}  // namespace sslab

#endif
