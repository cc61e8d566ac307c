#ifndef SSLAB_NUMERICS_RULES_HPP
#define SSLAB_NUMERICS_RULES_HPP

#include "sslab/numerics/precision.hpp"

#include <vector>

namespace sslab {

/// Gauss-Legendre nodes and weights on [-1,1], computed at the current working precision.
template <class R>
struct GaussRule {
    std::vector<R> x;
    std::vector<R> w;

    explicit GaussRule(int n) : x(n), w(n) {
        using std::abs;
        using std::cos;
        const R eps = epsilon_of<R>() * 16;
        const R p = pi<R>();
        for (int i = 0; i < (n + 1) / 2; ++i) {
            R z = cos(p * (R(i) + R(3) / 4) / (R(n) + R(1) / 2));
            R dp = 0;
            for (int it = 0; it < 100; ++it) {
                R p0 = 1, p1 = z;
                for (int k = 2; k <= n; ++k) {
                    R p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (z * p1 - p0) / (z * z - 1);
                R dz = p1 / dp;
                z -= dz;
                if (abs(dz) < eps) break;
            }
            R p0 = 1, p1 = z;
            for (int k = 2; k <= n; ++k) {
                R p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1);
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
        }
    }

    int size() const { return static_cast<int>(x.size()); }
};

/// Chebyshev-Lobatto rule on t in [0,1]: nodes, barycentric weights, differentiation
/// matrix D and cumulative integration matrix S (S(j,k) = integral from 0 to t_j of the
/// k-th Lagrange basis polynomial).
template <class R>
struct PanelRule {
    int n = 0;
    std::vector<R> t;
    std::vector<R> bw;
    std::vector<std::vector<R>> D;
    std::vector<std::vector<R>> S;

    explicit PanelRule(int n_nodes) : n(n_nodes), t(n_nodes), bw(n_nodes) {
        using std::cos;
        if (n < 3) throw ConfigError("panel rule needs at least 3 nodes");
        const int m = n - 1;
        const R p = pi<R>();
        std::vector<R> x(n);
        for (int j = 0; j < n; ++j) {
            x[j] = -cos(p * j / m);
            t[j] = (x[j] + 1) / 2;
            bw[j] = (j % 2 == 0) ? R(1) : R(-1);
        }
        bw[0] /= 2;
        bw[m] /= 2;

        D.assign(n, std::vector<R>(n, R(0)));
        for (int i = 0; i < n; ++i) {
            R diag = 0;
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                D[i][j] = (bw[j] / bw[i]) / (t[i] - t[j]);
                diag -= D[i][j];
            }
            D[i][i] = diag;
        }

        // T_k(x_j) table; x_j = -cos(pi j/m) so T_k(x_j) = (-1)^k cos(pi j k/m).
        std::vector<std::vector<R>> T(n, std::vector<R>(n + 1));
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k <= n; ++k) {
                R c = cos(p * (j * k % (2 * m)) / m);
                T[j][k] = (k % 2 == 0) ? c : R(-c);
            }
        }
        // Antiderivatives A_k with A_k(-1)=0 evaluated at nodes.
        auto tk_at_minus1 = [](int k) { return (k % 2 == 0) ? R(1) : R(-1); };
        std::vector<std::vector<R>> A(n, std::vector<R>(n));
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) {
                R a, a0;
                if (k == 0) {
                    a = T[j][1];
                    a0 = tk_at_minus1(1);
                } else if (k == 1) {
                    a = T[j][2] / 4;
                    a0 = tk_at_minus1(2) / 4;
                } else {
                    a = T[j][k + 1] / (2 * (k + 1)) - T[j][k - 1] / (2 * (k - 1));
                    a0 = tk_at_minus1(k + 1) / (2 * (k + 1)) - tk_at_minus1(k - 1) / (2 * (k - 1));
                }
                A[j][k] = a - a0;
            }
        }
        // Chebyshev coefficients c_k = sum_l C(k,l) v_l (discrete orthogonality on Lobatto points).
        std::vector<std::vector<R>> Cm(n, std::vector<R>(n));
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < n; ++l) {
                R v = T[l][k] * 2 / m;
                if (l == 0 || l == m) v /= 2;
                if (k == 0 || k == m) v /= 2;
                Cm[k][l] = v;
            }
        }
        S.assign(n, std::vector<R>(n, R(0)));
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                R acc = 0;
                for (int k = 0; k < n; ++k) acc += A[j][k] * Cm[k][l];
                S[j][l] = acc / 2;
            }
    }

    /// Barycentric interpolation weights for evaluating at local coordinate tau in [0,1].
    std::vector<R> interp_weights(const R& tau) const {
        using std::abs;
        std::vector<R> out(n, R(0));
        for (int j = 0; j < n; ++j) {
            if (abs(tau - t[j]) < epsilon_of<R>()) {
                out[j] = 1;
                return out;
            }
        }
        R den = 0;
        for (int j = 0; j < n; ++j) {
            out[j] = bw[j] / (tau - t[j]);
            den += out[j];
        }
        for (auto& v : out) v /= den;
        return out;
    }
};

}  // namespace sslab

#endif
