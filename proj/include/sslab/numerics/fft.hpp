#ifndef SSLAB_NUMERICS_FFT_HPP
#define SSLAB_NUMERICS_FFT_HPP

#include "sslab/numerics/precision.hpp"

#include <type_traits>
#include <vector>

namespace sslab {

/// Radix-2 complex FFT with precomputed twiddles. Size must be a power of two.
template <class R>
class FFTPlan {
public:
    explicit FFTPlan(int n) : n_(n), tw_(n / 2) {
        if (n < 2 || (n & (n - 1)) != 0) throw ConfigError("FFT size must be a power of two >= 2");
        using std::cos;
        using std::sin;
        const R p = pi<R>();
        for (int k = 0; k < n / 2; ++k) {
            R a = -2 * p * k / n;
            tw_[k] = cplx<R>(cos(a), sin(a));
        }
        rev_.resize(n);
        int bits = 0;
        while ((1 << bits) < n) ++bits;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (1 << b)) r |= 1 << (bits - 1 - b);
            rev_[i] = r;
        }
    }

    int size() const { return n_; }

    /// In place: a_k <- sum_j a_j e^{-2 pi i jk/n} (forward) or e^{+...} (inverse, unnormalized).
    void transform(std::vector<cplx<R>>& a, bool inverse) const {
        for (int i = 0; i < n_; ++i)
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        for (int len = 2; len <= n_; len <<= 1) {
            const int half = len / 2;
            const int step = n_ / len;
            for (int i = 0; i < n_; i += len) {
                for (int j = 0; j < half; ++j) {
                    cplx<R> w = tw_[j * step];
                    if (inverse) w = std::conj(w);
                    cplx<R> u = a[i + j];
                    cplx<R> v = a[i + j + half] * w;
                    a[i + j] = u + v;
                    a[i + j + half] = u - v;
                }
            }
        }
    }

    /// Grid values f(theta_j), theta_j = 2 pi j/n, from modes l in [-N,N] (modes[l+N]).
    void modes_to_grid(const std::vector<cplx<R>>& modes, int N, std::vector<cplx<R>>& grid) const {
        grid.assign(n_, cplx<R>(0));
        for (int l = -N; l <= N; ++l) grid[((l % n_) + n_) % n_] += modes[l + N];
        transform(grid, true);
    }

    /// Modes l in [-N,N] from grid values; also returns the largest discarded |mode|.
    R grid_to_modes(std::vector<cplx<R>> grid, int N, std::vector<cplx<R>>& modes) const {
        using std::abs;
        transform(grid, false);
        modes.assign(2 * N + 1, cplx<R>(0));
        const R inv = R(1) / n_;
        R lost = 0;
        for (int k = 0; k < n_; ++k) {
            int l = k <= n_ / 2 ? k : k - n_;
            cplx<R> v = grid[k] * inv;
            if (l >= -N && l <= N && !(n_ % 2 == 0 && k == n_ / 2 && N >= n_ / 2))
                modes[l + N] = v;
            else if (abs(v) > lost)
                lost = abs(v);
        }
        return lost;
    }

private:
    int n_;
    std::vector<cplx<R>> tw_;
    std::vector<int> rev_;
};

/// Trigonometric interpolant of n equispaced samples on [0, 2 pi) (n a power of two). The
/// Nyquist mode is split evenly between +-n/2 so real data give a real interpolant.
template <class R>
class TrigInterpolant {
public:
    TrigInterpolant() = default;

    explicit TrigInterpolant(const std::vector<R>& samples) : n_(static_cast<int>(samples.size())) {
        FFTPlan<R> plan(n_);
        std::vector<cplx<R>> g(samples.begin(), samples.end());
        plan.transform(g, false);
        c_.resize(n_ + 1);
        for (int l = -n_ / 2; l <= n_ / 2; ++l) {
            cplx<R> v = g[((l % n_) + n_) % n_] / R(n_);
            if (l == n_ / 2 || l == -n_ / 2) v /= R(2);
            c_[l + n_ / 2] = v;
        }
    }

    int size() const { return n_; }
    const cplx<R>& mode(int l) const { return c_[l + n_ / 2]; }

    /// Value (derivative order 0) or derivative at a real or complex abscissa.
    template <class T>
    T eval(const T& phi, int deriv = 0) const {
        using std::cos;
        using std::exp;
        using std::sin;
        cplx<R> acc(0);
        for (int l = -n_ / 2; l <= n_ / 2; ++l) {
            cplx<R> f = c_[l + n_ / 2];
            for (int k = 0; k < deriv; ++k) f *= cplx<R>(0, l);
            if constexpr (std::is_same_v<T, R>) {
                acc += f * cplx<R>(cos(R(l) * phi), sin(R(l) * phi));
            } else {
                acc += f * exp(cplx<R>(0, l) * phi);
            }
        }
        if constexpr (std::is_same_v<T, R>) {
            return acc.real();
        } else {
            return acc;
        }
    }

    /// Sum of |c_l| over the top quarter of the spectrum, a proxy for the interpolation error.
    R tail() const {
        using std::abs;
        R t = 0;
        for (int l = -n_ / 2; l <= n_ / 2; ++l)
            if (std::abs(l) > n_ / 4) t += abs(c_[l + n_ / 2]);
        return t;
    }

private:
    int n_ = 0;
    std::vector<cplx<R>> c_;
};

}  // namespace sslab

#endif
