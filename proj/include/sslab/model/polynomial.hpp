#ifndef SSLAB_MODEL_POLYNOMIAL_HPP
#define SSLAB_MODEL_POLYNOMIAL_HPP

#include "sslab/numerics/precision.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <vector>

namespace sslab {

/// Sparse polynomial in NV variables with real coefficients.
template <class R, int NV>
class Poly {
public:
    using Exps = std::array<int, NV>;

    struct Term {
        Exps e;
        R c;
    };

    Poly() = default;

    void add(const Exps& e, const R& c) {
        for (int v : e)
            if (v < 0) throw ConfigError("negative exponent in polynomial");
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
        }
    }

    void add(const Poly& o, const R& scale = R(1)) {
        for (const auto& [e, c] : o.terms_) add(e, c * scale);
    }

    /// Drops exactly-cancelled terms.
    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->second == 0) {
                it = terms_.erase(it);
            } else {
                ++it;
            }
        }
    }

    bool empty() const {
        for (const auto& [e, c] : terms_)
            if (c != 0) return false;
        return true;
    }

    std::vector<Term> terms() const {
        std::vector<Term> out;
        for (const auto& [e, c] : terms_)
            if (c != 0) out.push_back({e, c});
        return out;
    }

    R coeff(const Exps& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? R(0) : it->second;
    }

    static int degree_of(const Exps& e) {
        int d = 0;
        for (int v : e) d += v;
        return d;
    }

    int min_degree() const {
        int m = 1 << 20;
        for (const auto& [e, c] : terms_)
            if (c != 0) m = std::min(m, degree_of(e));
        return m;
    }

    int max_exponent(int var) const {
        int m = 0;
        for (const auto& [e, c] : terms_)
            if (c != 0) m = std::max(m, e[var]);
        return m;
    }

    Poly derivative(int var) const {
        Poly out;
        for (const auto& [e, c] : terms_) {
            if (e[var] == 0 || c == 0) continue;
            Exps f = e;
            f[var] -= 1;
            out.add(f, c * e[var]);
        }
        return out;
    }

    Poly operator*(const Poly& o) const {
        Poly out;
        for (const auto& [e1, c1] : terms_)
            for (const auto& [e2, c2] : o.terms_) {
                Exps e;
                for (int i = 0; i < NV; ++i) e[i] = e1[i] + e2[i];
                out.add(e, c1 * c2);
            }
        return out;
    }

    Poly pow(int k) const {
        Poly out;
        out.add(Exps{}, R(1));
        for (int i = 0; i < k; ++i) out = out * *this;
        return out;
    }

    template <class T>
    T eval(const std::array<T, NV>& x) const {
        std::array<std::vector<T>, NV> pw;
        for (int v = 0; v < NV; ++v) {
            int m = max_exponent(v);
            pw[v].resize(m + 1);
            pw[v][0] = T(1);
            for (int k = 1; k <= m; ++k) pw[v][k] = pw[v][k - 1] * x[v];
        }
        T acc = T(0);
        for (const auto& [e, c] : terms_) {
            if (c == 0) continue;
            T m = T(c);
            for (int v = 0; v < NV; ++v)
                if (e[v]) m *= pw[v][e[v]];
            acc += m;
        }
        return acc;
    }

private:
    std::map<Exps, R> terms_;
};

template <class R>
using Poly3 = Poly<R, 3>;

template <class R>
using Poly5 = Poly<R, 5>;

}  // namespace sslab

#endif
