#ifndef SSLAB_INNER_RIGHT_INVERSE_HPP
#define SSLAB_INNER_RIGHT_INVERSE_HPP

#include "sslab/inner/fourier_path.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <map>
#include <memory>
#include <tuple>
#include <vector>

namespace sslab {

/// Solves d psi_l' = (i l alpha + kappa/s) psi_l + phi_l mode by mode along a panel path,
/// by Chebyshev-Lobatto collocation of the integrated equation on each panel.
/// kappa = 2 gives a right inverse of L_inner, kappa = 0 one of -alpha d_theta + d d_s.
template <class R>
class ModeSolver {
public:
    using C = cplx<R>;
    using Mat = Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>;

    ModeSolver(std::shared_ptr<const PanelPath<R>> path, const R& alpha, const R& d, int kappa)
        : path_(std::move(path)), alpha_(alpha), d_(d), kappa_(kappa) {}

    const PanelPath<R>& path() const { return *path_; }
    int kappa() const { return kappa_; }

    /// Value of the solution decaying into the start tail, from the asymptotic
    /// expansion of the mode equation at s[0]. With at_end the expansion is taken at the
    /// last node instead (a finite path standing in for one that continues to infinity).
    C tail_value(int l, const FourierOnPath<R>& phi, bool at_end = false) const {
        using std::abs;
        const auto& P = *path_;
        if (!at_end && P.tail != Tail::at_start)
            throw ConfigError("tail value requested on a path without a start tail");
        const int n = P.n();
        const std::size_t p = at_end ? P.panels() - 1 : 0;
        const int j0 = at_end ? n - 1 : 0;
        std::vector<C> v(n), sn(n);
        for (int j = 0; j < n; ++j) {
            v[j] = phi.at(P.idx(p, j), l);
            sn[j] = P.s[P.idx(p, j)];
        }
        const C s0 = sn[j0];
        const C ih = C(1) / P.h(p);
        auto deriv = [&](const std::vector<C>& f, int i) {
            C acc(0);
            for (int j = 0; j < n; ++j) acc += P.rule->D[i][j] * f[j];
            return acc * ih;
        };
        if (l == 0) {
            if (v[j0] == C(0)) return C(0);
            // Local model phi ~ A w^-p (1 + B/w), fitted from the logarithmic derivative
            // g = w phi'/phi = -p - u, u = B/(w+B), and w g' = u (1 - u).
            std::vector<C> g(n);
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                if (v[i] == C(0)) ok = false;
                else g[i] = sn[i] * deriv(v, i) / v[i];
            }
            const C beta = C(-R(kappa_) / d_);
            if (ok) {
                C wg = s0 * deriv(g, j0);
                C disc = C(1) - R(4) * wg;
                C u = (C(1) - std::sqrt(disc)) / R(2);
                C pw = -g[j0] - u;
                C B = u * s0 / (C(1) - u);
                // psi = s^{-beta}/d * int w^beta phi = (s phi / d) (1/(beta+1-p) + (B/s)/(beta-p)) / (1 + B/s)
                C model = (C(1) / (beta + R(1) - pw) + (B / s0) / (beta - pw)) / (C(1) + B / s0);
                if (is_finite(model)) return s0 * v[j0] * model / d_;
            }
            C pw = ok ? -g[j0] : C(0);
            return s0 * v[j0] / (C(d_ - kappa_) - d_ * pw);
        }
        // psi = -(1/(i l alpha)) sum_k B^k phi with B(f) = (d f' - kappa f/s)/(i l alpha)
        const C ila(0, l * alpha_);
        C sum(0);
        R last = -1;
        std::vector<C> term = v;
        for (int k = 0; k < 16; ++k) {
            R mag = abs(term[j0]);
            if (last >= 0 && mag > last) break;  // asymptotic series started to diverge
            sum += term[j0];
            if (mag <= abs(sum) * epsilon_of<R>()) break;
            last = mag;
            std::vector<C> next(n);
            for (int i = 0; i < n; ++i) next[i] = (d_ * deriv(term, i) - R(kappa_) * term[i] / sn[i]) / ila;
            term.swap(next);
        }
        return -sum / ila;
    }

    /// Mean-mode value at the last node from a least-squares fit phi_0 ~ sum_{k=1..terms} c_k s^-k
    /// over the nodes with |s| >= |s_end| / range, integrated from infinity term by term. The 1/s
    /// term would make the integral diverge for kappa = 0; its coefficient is dropped (returned
    /// in c1 when requested) and should be negligible.
    C mean_tail_series(const FourierOnPath<R>& phi, const R& range = R(4), int terms = 4, C* c1 = nullptr) const {
        using std::abs;
        using Vec = Eigen::Matrix<C, Eigen::Dynamic, 1>;
        const auto& P = *path_;
        const std::size_t last = P.size() - 1;
        const C s_end = P.s[last];
        const R scale = abs(s_end);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i <= last; ++i)
            if (abs(P.s[i]) * range >= scale) rows.push_back(i);
        if (static_cast<int>(rows.size()) < 2 * terms) throw NumericalError("mean_tail_series: too few nodes for the fit");
        Mat A(rows.size(), terms);
        Vec b(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const C x = C(scale) / P.s[rows[r]];
            C pw = x;
            for (int k = 0; k < terms; ++k) {
                A(r, k) = pw;
                pw *= x;
            }
            b(r) = phi.at(rows[r], 0);
        }
        Vec c = A.colPivHouseholderQr().solve(b);  // phi_0 = sum c_k (scale/s)^(k+1)
        if (c1) *c1 = c(0) * scale;
        // s^-beta/d int^s w^beta (scale/w)^m dw = s (scale/s)^m / (d (beta + 1 - m))
        const C beta = C(-R(kappa_) / d_);
        C out(0);
        for (int k = 0; k < terms; ++k) {
            const int m = k + 1;
            const C den = beta + R(1) - R(m);
            if (den == C(0)) continue;
            out += c(k) * std::pow(C(scale) / s_end, C(R(m))) * s_end / (d_ * den);
        }
        return out;
    }

    /// Propagates mode l from node `start` (0 or the last node) with value v0 across the path.
    void propagate(int l, const FourierOnPath<R>& phi, bool from_start, const C& v0, FourierOnPath<R>& out) const {
        const auto& P = *path_;
        const int n = P.n();
        const std::size_t np = P.panels();
        out.at(from_start ? 0 : P.size() - 1, l) = v0;
        std::vector<C> f(n), rhs(n - 1);
        for (std::size_t q = 0; q < np; ++q) {
            const std::size_t p = from_start ? q : np - 1 - q;
            auto node = [&](int j) { return from_start ? P.idx(p, j) : P.idx(p, n - 1 - j); };
            const C h = from_start ? P.h(p) : -P.h(p);
            const C hd = h / d_;
            const C psi0 = out.at(node(0), l);
            for (int j = 0; j < n; ++j) f[j] = hd * phi.at(node(j), l);
            const C g0 = hd * (C(0, l * alpha_) + R(kappa_) / P.s[node(0)]);
            const Mat& Ainv = inverse(p, from_start, l);
            for (int j = 1; j < n; ++j) {
                C acc = psi0 * (C(1) + P.rule->S[j][0] * g0);
                for (int k = 0; k < n; ++k) acc += P.rule->S[j][k] * f[k];
                rhs[j - 1] = acc;
            }
            for (int j = 1; j < n; ++j) {
                C acc(0);
                for (int k = 0; k < n - 1; ++k) acc += Ainv(j - 1, k) * rhs[k];
                out.at(node(j), l) = acc;
            }
        }
    }

    /// d_s psi_l from the mode equation.
    C derivative(int l, const C& s, const C& psi, const C& phi) const {
        return (phi + (C(0, l * alpha_) + R(kappa_) / s) * psi) / d_;
    }

    void clear_cache() { cache_.clear(); }

private:
    const Mat& inverse(std::size_t p, bool forward, int l) const {
        auto key = std::make_tuple(p, forward, l);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const auto& P = *path_;
        const int n = P.n();
        const C h = forward ? P.h(p) : -P.h(p);
        Mat A(n - 1, n - 1);
        for (int k = 1; k < n; ++k) {
            std::size_t gk = forward ? P.idx(p, k) : P.idx(p, n - 1 - k);
            C g = h / d_ * (C(0, l * alpha_) + R(kappa_) / P.s[gk]);
            for (int j = 1; j < n; ++j) A(j - 1, k - 1) = (j == k ? C(1) : C(0)) - P.rule->S[j][k] * g;
        }
        Mat inv = A.partialPivLu().inverse();
        return cache_.emplace(key, std::move(inv)).first->second;
    }

    std::shared_ptr<const PanelPath<R>> path_;
    R alpha_, d_;
    int kappa_;
    mutable std::map<std::tuple<std::size_t, bool, int>, Mat> cache_;
};

/// G(phi) on a path with a start tail: each mode is the solution decaying into the tail.
/// Also returns d_s G(phi) from the mode equation when dout is non-null.
template <class R>
FourierOnPath<R> right_inverse_G(const FourierOnPath<R>& phi, const ModeSolver<R>& ms,
                                 FourierOnPath<R>* dout = nullptr) {
    FourierOnPath<R> out(phi.path, phi.N, phi.strip);
    for (int l = -phi.N; l <= phi.N; ++l) ms.propagate(l, phi, true, ms.tail_value(l, phi), out);
    if (dout) {
        *dout = FourierOnPath<R>(phi.path, phi.N, phi.strip);
        for (std::size_t i = 0; i < out.size(); ++i)
            for (int l = -phi.N; l <= phi.N; ++l)
                dout->at(i, l) = ms.derivative(l, out.s(i), out.at(i, l), phi.at(i, l));
    }
    return out;
}

}  // namespace sslab

#endif
