#ifndef SSLAB_INNER_FOURIER_PATH_HPP
#define SSLAB_INNER_FOURIER_PATH_HPP

#include "sslab/numerics/complex_path.hpp"
#include "sslab/numerics/precision.hpp"
#include "sslab/numerics/rules.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

namespace sslab {

/// A path cut into straight panels, each carrying the same Chebyshev-Lobatto rule.
/// Consecutive panels share their endpoint node. With a start tail, the path
/// conceptually begins at complex infinity before s[0].
template <class R>
struct PanelPath {
    using C = cplx<R>;
    std::shared_ptr<const PanelRule<R>> rule;
    std::vector<C> breaks;
    std::vector<C> s;
    Tail tail = Tail::none;

    int n() const { return rule->n; }
    std::size_t panels() const { return breaks.size() - 1; }
    std::size_t size() const { return s.size(); }
    std::size_t idx(std::size_t p, int j) const { return p * (n() - 1) + j; }
    C h(std::size_t p) const { return breaks[p + 1] - breaks[p]; }

    static PanelPath from_breaks(std::vector<C> breaks, std::shared_ptr<const PanelRule<R>> rule,
                                 Tail tail = Tail::none) {
        if (breaks.size() < 2) throw ConfigError("panel path needs at least one panel");
        PanelPath p;
        p.rule = std::move(rule);
        p.breaks = std::move(breaks);
        p.tail = tail;
        for (std::size_t k = 1; k < p.breaks.size(); ++k)
            if (p.breaks[k] == p.breaks[k - 1]) throw ConfigError("panel path has a zero-length panel");
        const int n = p.n();
        p.s.reserve(p.panels() * (n - 1) + 1);
        p.s.push_back(p.breaks[0]);
        for (std::size_t k = 0; k < p.panels(); ++k)
            for (int j = 1; j < n; ++j) p.s.push_back(p.breaks[k] + p.rule->t[j] * p.h(k));
        p.s.back() = p.breaks.back();
        for (const auto& z : p.s)
            if (z == C(0)) throw ConfigError("path passes through s = 0");
        return p;
    }

    ComplexPath<R> as_complex_path() const { return ComplexPath<R>::from_nodes(breaks, tail); }
};

/// Geometry knobs for panel construction.
template <class R>
struct PathOptions {
    int nodes_per_panel = 24;
    R growth = R(1) / 2;   // panel length / |s| in the far region
    R h_max = R(5) / 2;    // panel length cap near the end point
    R near = R(40);        // length of the region next to the end point using h_max
    R seg_h_max = R(2);    // panel length on finite segments
};

/// Horizontal path from Re s = -inf (sign = -1) or +inf (sign = +1) to `end`, ordered
/// from the far end: s[0] is at |Re s - Re end| >= reach.
template <class R>
PanelPath<R> make_horizontal_path(const cplx<R>& end, int sign, const R& reach, const PathOptions<R>& o,
                                  std::shared_ptr<const PanelRule<R>> rule) {
    using std::abs;
    std::vector<cplx<R>> br{end};
    R x = end.real();
    const R y = end.imag();
    R dist = 0;
    while (dist < reach) {
        R mag = abs(cplx<R>(x, y));
        R len = o.growth * mag;
        if (dist < o.near && len > o.h_max) len = o.h_max;
        if (len < o.h_max / 4) len = o.h_max / 4;
        x += sign * len;
        dist += len;
        br.push_back(cplx<R>(x, y));
    }
    std::reverse(br.begin(), br.end());
    return PanelPath<R>::from_breaks(std::move(br), std::move(rule), Tail::at_start);
}

/// Straight segment from a to b, uniform panels of length <= o.seg_h_max.
template <class R>
PanelPath<R> make_segment_path(const cplx<R>& a, const cplx<R>& b, const PathOptions<R>& o,
                               std::shared_ptr<const PanelRule<R>> rule) {
    using std::abs;
    using std::ceil;
    int m = std::max(1, static_cast<int>(ceil(to_double(abs(b - a) / o.seg_h_max))));
    std::vector<cplx<R>> br;
    for (int k = 0; k <= m; ++k) br.push_back(a + (b - a) * R(k) / R(m));
    br.back() = b;
    return PanelPath<R>::from_breaks(std::move(br), std::move(rule), Tail::none);
}

/// Straight ray from a towards b: uniform panels of length <= o.seg_h_max up to distance
/// `uniform`, then panels growing like o.growth * |s| until b.
template <class R>
PanelPath<R> make_ray_path(const cplx<R>& a, const cplx<R>& b, const R& uniform, const PathOptions<R>& o,
                           std::shared_ptr<const PanelRule<R>> rule) {
    using std::abs;
    using std::ceil;
    const R total = abs(b - a);
    if (!(uniform < total)) return make_segment_path(a, b, o, std::move(rule));
    const cplx<R> dir = (b - a) / total;
    int m = std::max(1, static_cast<int>(ceil(to_double(uniform / o.seg_h_max))));
    std::vector<cplx<R>> br;
    for (int k = 0; k <= m; ++k) br.push_back(a + dir * (uniform * R(k) / R(m)));
    R t = uniform;
    while (t < total) {
        R len = std::max<R>(o.seg_h_max, o.growth * abs(a + dir * t));
        if (total - t < len * 3 / 2) len = total - t;
        t += len;
        br.push_back(t >= total ? b : a + dir * t);
    }
    return PanelPath<R>::from_breaks(std::move(br), std::move(rule), Tail::none);
}

/// psi(s, theta) = sum_{|l|<=N} psi^[l](s) e^{i l theta} sampled at the nodes of a panel path.
template <class R>
struct FourierOnPath {
    using C = cplx<R>;
    std::shared_ptr<const PanelPath<R>> path;
    int N = 0;
    std::vector<std::vector<C>> c;  // c[node][l + N]
    R strip = R(0);

    FourierOnPath() = default;
    FourierOnPath(std::shared_ptr<const PanelPath<R>> p, int modes, const R& strip_halfwidth = R(0))
        : path(std::move(p)), N(modes), c(path->size(), std::vector<C>(2 * modes + 1, C(0))), strip(strip_halfwidth) {}

    std::size_t size() const { return c.size(); }
    const C& at(std::size_t i, int l) const { return c[i][l + N]; }
    C& at(std::size_t i, int l) { return c[i][l + N]; }
    const C& s(std::size_t i) const { return path->s[i]; }

    /// sum_l |psi^[l](s_i)| e^{|l| strip}
    R norm_at(std::size_t i) const {
        using std::abs;
        using std::exp;
        R acc = 0;
        for (int l = -N; l <= N; ++l) {
            R w = strip == 0 ? R(1) : exp(strip * std::abs(l));
            acc += abs(at(i, l)) * w;
        }
        return acc;
    }

    /// sup_i |s_i|^n norm_at(i)
    R weighted_sup(const R& n) const {
        using std::abs;
        using std::pow;
        R m = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            R v = pow(abs(s(i)), n) * norm_at(i);
            if (v > m) m = v;
        }
        return m;
    }

    C eval(std::size_t i, const C& theta) const {
        C acc(0);
        for (int l = -N; l <= N; ++l) acc += at(i, l) * std::exp(C(0, l) * theta);
        return acc;
    }

    FourierOnPath& operator+=(const FourierOnPath& o) {
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t k = 0; k < c[i].size(); ++k) c[i][k] += o.c[i][k];
        return *this;
    }
    FourierOnPath& operator-=(const FourierOnPath& o) {
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t k = 0; k < c[i].size(); ++k) c[i][k] -= o.c[i][k];
        return *this;
    }
    friend FourierOnPath operator-(FourierOnPath a, const FourierOnPath& b) { return a -= b; }
    friend FourierOnPath operator+(FourierOnPath a, const FourierOnPath& b) { return a += b; }

    /// Checks psi^[-l](s) = conj(psi^[l](s)) for data real on real arguments (reflected in s).
    R real_symmetry_defect() const {
        using std::abs;
        R m = 0;
        for (std::size_t i = 0; i < size(); ++i)
            for (int l = 1; l <= N; ++l) m = std::max<R>(m, abs(at(i, -l) - std::conj(at(i, l))));
        return m;
    }
};

}  // namespace sslab

#endif
