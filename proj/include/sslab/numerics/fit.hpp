#ifndef SSLAB_NUMERICS_FIT_HPP
#define SSLAB_NUMERICS_FIT_HPP

#include "sslab/numerics/precision.hpp"

#include <vector>

namespace sslab {

template <class R>
struct LineFit {
    R slope = 0;
    R intercept = 0;
    R rms = 0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x.
template <class R>
LineFit<R> fit_line(const std::vector<R>& x, const std::vector<R>& y) {
    using std::sqrt;
    if (x.size() != y.size() || x.size() < 2) throw NumericalError("line fit needs at least two points");
    const R n = R(static_cast<long>(x.size()));
    R sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const R mx = sx / n, my = sy / n;
    R sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw NumericalError("line fit with constant abscissa");
    LineFit<R> f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    R ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        R r = y[i] - f.intercept - f.slope * x[i];
        ss += r * r;
    }
    f.rms = sqrt(ss / n);
    f.n = x.size();
    return f;
}

}  // namespace sslab

#endif
