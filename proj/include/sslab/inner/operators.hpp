#ifndef SSLAB_INNER_OPERATORS_HPP
#define SSLAB_INNER_OPERATORS_HPP

#include "sslab/inner/fourier_path.hpp"
#include "sslab/model/inner_nonlinearities.hpp"
#include "sslab/numerics/fft.hpp"

#include <cmath>
#include <vector>

namespace sslab {

/// Derivative along the path by panelwise spectral differentiation.
/// Shared panel endpoints take the mean of the two one-sided values.
template <class R>
FourierOnPath<R> differentiate(const FourierOnPath<R>& f) {
    using C = cplx<R>;
    const auto& P = *f.path;
    const int n = P.n();
    FourierOnPath<R> out(f.path, f.N, f.strip);
    std::vector<int> hits(P.size(), 0);
    for (std::size_t p = 0; p < P.panels(); ++p) {
        const C ih = C(1) / P.h(p);
        for (int i = 0; i < n; ++i) {
            std::size_t gi = P.idx(p, i);
            ++hits[gi];
            for (int l = -f.N; l <= f.N; ++l) {
                C acc(0);
                for (int j = 0; j < n; ++j) acc += P.rule->D[i][j] * f.at(P.idx(p, j), l);
                out.at(gi, l) += acc * ih;
            }
        }
    }
    for (std::size_t i = 0; i < P.size(); ++i)
        if (hits[i] > 1)
            for (auto& v : out.c[i]) v /= R(hits[i]);
    return out;
}

/// L(psi) = -alpha d_theta psi + d d_s psi - 2 psi / s, mode by mode.
template <class R>
FourierOnPath<R> apply_L(const FourierOnPath<R>& psi, const R& alpha, const R& d) {
    using C = cplx<R>;
    FourierOnPath<R> ds = differentiate(psi);
    FourierOnPath<R> out(psi.path, psi.N, psi.strip);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const C two_over_s = C(2) / psi.s(i);
        for (int l = -psi.N; l <= psi.N; ++l)
            out.at(i, l) = C(0, -l * alpha) * psi.at(i, l) + d * ds.at(i, l) - two_over_s * psi.at(i, l);
    }
    return out;
}

/// Pseudo-spectral evaluator of M(psi, delta) on a theta grid of 4N points (rounded up to a power of two).
template <class R>
class MEvaluator {
public:
    using C = cplx<R>;

    MEvaluator(const InnerNonlinearity<R>& nl, int N) : nl_(nl), N_(N), fft_(grid_size(N)) {
        using std::cos;
        using std::sin;
        const int n = fft_.size();
        for (int j = 0; j < n; ++j) {
            R th = 2 * pi<R>() * j / n;
            cos_.push_back(C(cos(th)));
            sin_.push_back(C(sin(th)));
        }
    }

    static int grid_size(int N) {
        int n = 2;
        while (n < 4 * N) n *= 2;
        return n;
    }

    int grid() const { return fft_.size(); }
    const InnerNonlinearity<R>& nonlinearity() const { return nl_; }
    const FFTPlan<R>& fft() const { return fft_; }
    const std::vector<C>& cos_table() const { return cos_; }
    const std::vector<C>& sin_table() const { return sin_; }

    /// M at one node. psi, dpsi hold the modes of psi and d_s psi there. Returns the
    /// largest mode discarded by the truncation to |l| <= N.
    R node(const std::vector<C>& psi, const std::vector<C>& dpsi, const C& s, const R& delta, const R& sigma,
           std::vector<C>& out) const {
        const auto& sp = nl_.spec();
        const int n = fft_.size();
        std::vector<C> th(2 * N_ + 1);
        for (int l = -N_; l <= N_; ++l) th[l + N_] = C(0, l) * psi[l + N_];
        std::vector<C> g_psi, g_th, g_ds;
        fft_.modes_to_grid(psi, N_, g_psi);
        fft_.modes_to_grid(th, N_, g_th);
        fft_.modes_to_grid(dpsi, N_, g_ds);
        const C is = C(1) / s;
        const C s2 = s * s;
        const R k = (sp.d + 1) / sp.b;
        std::vector<C> m(n);
        for (int j = 0; j < n; ++j) {
            auto t = nl_.eval_cs(g_psi[j], s, cos_[j], sin_[j], delta, sigma);
            C v = sp.c() * is * g_th[j] + t.F + k * is * t.H - t.G * g_th[j] +
                  s2 * (R(2) * sp.b * g_psi[j] + t.H) * g_ds[j];
            if (delta != 0) v += sp.d * delta * delta * s2 * g_ds[j];
            if (sigma != 0) v += sigma * t.rho * t.rho;
            m[j] = v;
        }
        return fft_.grid_to_modes(std::move(m), N_, out);
    }

private:
    InnerNonlinearity<R> nl_;
    int N_;
    FFTPlan<R> fft_;
    std::vector<C> cos_, sin_;
};

/// Values on the theta grid of MEvaluator::grid_size(N) points for fields given by modes.
template <class R>
class ThetaGrid {
public:
    using C = cplx<R>;

    explicit ThetaGrid(int N) : N_(N), fft_(MEvaluator<R>::grid_size(N)) {}

    int N() const { return N_; }
    int size() const { return fft_.size(); }

    R theta(int j) const { return 2 * pi<R>() * j / fft_.size(); }

    std::vector<C> values(const FourierOnPath<R>& f, std::size_t i) const {
        std::vector<C> g;
        fft_.modes_to_grid(f.c[i], N_, g);
        return g;
    }

    /// Grid values of d_theta f.
    std::vector<C> theta_derivative(const FourierOnPath<R>& f, std::size_t i) const {
        std::vector<C> m(2 * N_ + 1), g;
        for (int l = -N_; l <= N_; ++l) m[l + N_] = C(0, l) * f.at(i, l);
        fft_.modes_to_grid(m, N_, g);
        return g;
    }

    R to_modes(std::vector<C> g, std::vector<C>& modes) const { return fft_.grid_to_modes(std::move(g), N_, modes); }

private:
    int N_;
    FFTPlan<R> fft_;
};

template <class R>
struct MResult {
    FourierOnPath<R> value;
    R overflow = R(0);  // max over nodes of (discarded mode / retained norm)
};

/// M(psi, delta) with d_s psi supplied (e.g. from the L relation of the solver).
template <class R>
MResult<R> apply_M(const FourierOnPath<R>& psi, const FourierOnPath<R>& dpsi, const R& delta, const R& sigma,
                   const MEvaluator<R>& ev) {
    if (delta == 0 && sigma != 0) throw ConfigError("apply_M at delta = 0 requires sigma = 0");
    MResult<R> r{FourierOnPath<R>(psi.path, psi.N, psi.strip), R(0)};
    for (std::size_t i = 0; i < psi.size(); ++i) {
        R lost = ev.node(psi.c[i], dpsi.c[i], psi.s(i), delta, sigma, r.value.c[i]);
        R nrm = r.value.norm_at(i);
        if (lost > 0) {
            R ratio = nrm > 0 ? lost / nrm : R(1);
            if (ratio > r.overflow) r.overflow = ratio;
        }
    }
    return r;
}

/// M(psi, delta) with d_s psi obtained by spectral differentiation along the path.
template <class R>
MResult<R> apply_M(const FourierOnPath<R>& psi, const R& delta, const R& sigma, const MEvaluator<R>& ev) {
    return apply_M(psi, differentiate(psi), delta, sigma, ev);
}

}  // namespace sslab

#endif
