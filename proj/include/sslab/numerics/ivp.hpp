#ifndef SSLAB_NUMERICS_IVP_HPP
#define SSLAB_NUMERICS_IVP_HPP

#include "sslab/numerics/precision.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sslab {

template <class Y>
using State = std::vector<Y>;

template <class R, class Y>
using Field = std::function<void(const R& t, const State<Y>& y, State<Y>& dy)>;

/// Terminal event: the real part of component `component` reaches `value`.
template <class R>
struct CrossingEvent {
    std::size_t component = 0;
    R value{};
    int direction = 0;  // +1 upward only, -1 downward only, 0 either
    bool required = false;
};

template <class R, class Y>
struct EventHit {
    R t;
    State<Y> y;
};

template <class R>
struct IvpOptions {
    int stages = 0;  // extrapolation stages k (order 2k); 0 picks from precision
    R initial_step = R(0);
    R max_step = R(0);
    long max_steps = 2000000;
};

inline int default_gbs_stages(unsigned bits) {
    return std::clamp(static_cast<int>(bits) / 16 + 2, 6, 20);
}

namespace detail {

template <class Y>
auto mag(const Y& v) {
    using std::abs;
    return abs(v);
}

template <class Y>
auto real_part(const Y& v) {
    if constexpr (requires { v.real(); }) {
        return v.real();
    } else {
        return v;
    }
}

}  // namespace detail

/// Accepted steps of an integration plus the located event (if any). state_at re-steps from
/// the nearest accepted node, so dense queries carry the same local accuracy as the steps.
template <class R, class Y>
class Trajectory {
public:
    std::vector<R> t;
    std::vector<State<Y>> y;
    std::optional<EventHit<R, Y>> event;
    long rejected = 0;

    State<Y> state_at(const R& tq) const;
    const State<Y>& back() const { return y.back(); }

    // Set by the integrator.
    std::function<State<Y>(const R&, const State<Y>&, const R&)> stepper;
};

template <class R, class Y>
State<Y> Trajectory<R, Y>::state_at(const R& tq) const {
    const bool forward = t.back() >= t.front();
    auto lo = t.front(), hi = t.back();
    if (!forward) std::swap(lo, hi);
    if (tq < lo || tq > hi) throw NumericalError("dense query outside the integrated interval");
    std::size_t i = 0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        if (forward ? (t[k] <= tq) : (t[k] >= tq)) i = k;
    }
    if (tq == t[i]) return y[i];
    return stepper(t[i], y[i], tq - t[i]);
}

/// Gragg-Bulirsch-Stoer extrapolation integrator (modified midpoint rule with polynomial
/// extrapolation in h^2). Order 2k with k stages; the difference between the last two
/// diagonal entries of the tableau is the embedded error estimate.
template <class R, class Y>
class GbsIntegrator {
public:
    GbsIntegrator(Field<R, Y> field, const PrecisionCtx& ctx, IvpOptions<R> opt = {})
        : f_(std::move(field)), atol_(R(ctx.abs_tol())), rtol_(R(ctx.rel_tol())), opt_(opt) {
        k_ = opt_.stages > 0 ? opt_.stages : default_gbs_stages(ctx.mantissa_bits());
        for (int j = 1; j <= k_; ++j) seq_.push_back(2 * j);
    }

    int order() const { return 2 * k_; }

    /// One extrapolated step of size H; err receives the scaled error estimate.
    State<Y> step(const R& t0, const State<Y>& y0, const R& H, R* err = nullptr) const {
        const std::size_t n = y0.size();
        State<Y> f0(n);
        f_(t0, y0, f0);
        std::vector<State<Y>> T(k_);
        State<Y> zm(n), z(n), zn(n), fz(n);
        for (int j = 0; j < k_; ++j) {
            const int nj = seq_[j];
            const R h = H / nj;
            for (std::size_t i = 0; i < n; ++i) {
                zm[i] = y0[i];
                z[i] = y0[i] + f0[i] * h;
            }
            for (int m = 1; m < nj; ++m) {
                f_(t0 + h * m, z, fz);
                for (std::size_t i = 0; i < n; ++i) {
                    zn[i] = zm[i] + fz[i] * (2 * h);
                    zm[i] = z[i];
                    z[i] = zn[i];
                }
            }
            T[j] = z;
            // Neville update along the row (in place, in h^2).
            for (int m = j - 1; m >= 0; --m) {
                R ratio = R(seq_[j]) / R(seq_[m]);
                R fac = ratio * ratio - 1;
                for (std::size_t i = 0; i < n; ++i) T[m][i] = T[m + 1][i] + (T[m + 1][i] - T[m][i]) / fac;
            }
        }
        // After the loop T[0] holds the full extrapolation, T[1] the previous diagonal entry.
        if (err) {
            R e = 0;
            for (std::size_t i = 0; i < n; ++i) {
                R sc = atol_ + rtol_ * std::max<R>(detail::mag(y0[i]), detail::mag(T[0][i]));
                R v = detail::mag(T[0][i] - T[1][i]) / sc;
                if (v > e) e = v;
            }
            *err = e;
        }
        return T[0];
    }

    Trajectory<R, Y> integrate(const State<Y>& y0, const R& t0, const R& t1,
                               const std::optional<CrossingEvent<R>>& event = std::nullopt) const {
        using std::abs;
        using std::pow;
        if (!is_finite(t0) || !is_finite(t1) || t0 == t1) throw NumericalError("invalid integration interval");
        Trajectory<R, Y> tr;
        tr.t.push_back(t0);
        tr.y.push_back(y0);
        auto self = std::make_shared<GbsIntegrator>(*this);
        tr.stepper = [self](const R& ts, const State<Y>& ys, const R& h) { return self->step(ts, ys, h); };
        const R dir = t1 > t0 ? R(1) : R(-1);
        const R span = abs(t1 - t0);
        R h = opt_.initial_step > 0 ? R(opt_.initial_step) : span / 100;
        const R hmax = opt_.max_step > 0 ? R(opt_.max_step) : span;
        const R hmin = span * epsilon_of<R>() * 1024;
        R t = t0;
        State<Y> y = y0;
        const R expo = R(1) / (2 * k_ - 1);
        for (long steps = 0;; ++steps) {
            if (steps >= opt_.max_steps) throw NumericalError("integrator: maximum number of steps exceeded");
            bool last = false;
            if (h >= abs(t1 - t)) {
                h = abs(t1 - t);
                last = true;
            }
            R err;
            State<Y> yn = step(t, y, h * dir, &err);
            bool finite = true;
            for (const auto& v : yn) finite = finite && is_finite(v);
            if (!finite || err > 1) {
                ++tr.rejected;
                R fac = finite ? R(0.9) * pow(R(1) / err, expo) : R(0.25);
                h *= std::clamp<R>(fac, R(0.1), R(0.7));
                if (h < hmin) throw NumericalError("integrator: step-size underflow near t=" + to_sci(t, 12));
                continue;
            }
            const R tn = last ? R(t1) : R(t + h * dir);
            if (event) {
                auto g = [&](const State<Y>& s) { return R(detail::real_part(s[event->component])) - event->value; };
                R g0 = g(y), g1 = g(yn);
                bool crosses = (g0 < 0 && g1 >= 0 && event->direction >= 0) || (g0 > 0 && g1 <= 0 && event->direction <= 0);
                if (crosses) {
                    tr.event = locate(t, y, h * dir, g0, g1, *event);
                    tr.t.push_back(tr.event->t);
                    tr.y.push_back(tr.event->y);
                    return tr;
                }
            }
            t = tn;
            y = std::move(yn);
            tr.t.push_back(t);
            tr.y.push_back(y);
            if (last) break;
            R fac = err > 0 ? R(0.9) * pow(R(1) / err, expo) : R(4);
            h = std::min<R>(hmax, h * std::clamp<R>(fac, R(0.2), R(4)));
        }
        if (event && event->required) throw NumericalError("event not bracketed in the integration interval");
        return tr;
    }

private:
    EventHit<R, Y> locate(const R& t, const State<Y>& y, const R& H, R g0, R g1, const CrossingEvent<R>& ev) const {
        using std::abs;
        // Illinois regula falsi on tau in [0, H], each evaluation a fresh step from (t, y).
        R a = 0, b = H, ga = g0, gb = g1;
        int side = 0;
        State<Y> ys;
        R tau = b;
        const R tol = rtol_ * std::max<R>(R(1), abs(t)) + atol_;
        for (int it = 0; it < 200; ++it) {
            tau = (a * gb - b * ga) / (gb - ga);
            ys = step(t, y, tau);
            R gt = R(detail::real_part(ys[ev.component])) - ev.value;
            if (abs(b - a) <= tol || gt == 0) break;
            if ((gt < 0) == (gb < 0)) {
                b = tau;
                gb = gt;
                if (side == -1) ga /= 2;
                side = -1;
            } else {
                a = tau;
                ga = gt;
                if (side == +1) gb /= 2;
                side = +1;
            }
            if (abs(gt) <= tol * (abs(g0) + abs(g1))) break;
        }
        return EventHit<R, Y>{t + tau, ys};
    }

    Field<R, Y> f_;
    R atol_;
    R rtol_;
    IvpOptions<R> opt_;
    int k_;
    std::vector<int> seq_;
};

/// Convenience wrapper: integrate field from y0 over [t0, t1], optionally stopping at an event.
template <class R, class Y>
Trajectory<R, Y> integrate_ivp(Field<R, Y> field, const State<Y>& y0, const R& t0, const R& t1,
                               const PrecisionCtx& ctx,
                               const std::optional<CrossingEvent<R>>& event = std::nullopt,
                               IvpOptions<R> opt = {}) {
    GbsIntegrator<R, Y> gbs(std::move(field), ctx, opt);
    auto tr = gbs.integrate(y0, t0, t1, event);
    return tr;
}

}  // namespace sslab

#endif
