#ifndef SSLAB_SPLITTING_MANIFOLD_HPP
#define SSLAB_SPLITTING_MANIFOLD_HPP

#include "sslab/inner/solver.hpp"
#include "sslab/model/critical_points.hpp"
#include "sslab/model/heteroclinic.hpp"
#include "sslab/numerics/fft.hpp"
#include "sslab/numerics/ivp.hpp"
#include "sslab/numerics/parallel.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace sslab {

struct FoldDetected : NumericalError {
    using NumericalError::NumericalError;
};

/// Plane z = z_star = tanh(d v) in scaled variables with a uniform theta grid of n_sec points.
template <class R>
struct SectionSpec {
    R v = 0;
    R z_star = 0;
    int n_sec = 64;

    R theta(int k) const { return 2 * pi<R>() * R(k) / R(n_sec); }
};

template <class R>
SectionSpec<R> make_section(const UnfoldingSpec<R>& spec, const R& v, int n_sec) {
    using std::tanh;
    if (n_sec < 32 || (n_sec & (n_sec - 1)) != 0) throw ConfigError("N_sec must be a power of two >= 32");
    SectionSpec<R> s;
    s.v = v;
    s.z_star = tanh(spec.d * v);
    s.n_sec = n_sec;
    return s;
}

/// Second-order jet of the two-dimensional invariant manifold of a saddle-focus, written as
/// a graph eta = xi^T M xi over the eigenplane of the complex pair. Coordinates:
/// point = S + P (xi1, xi2, eta) with P = [Re v, Im v, w], v the eigenvector of a + i omega
/// (omega > 0) normalized to v_x = 1 and w the real eigenvector.
template <class R>
class LocalJet {
public:
    using Mat3 = Eigen::Matrix<R, 3, 3>;

    LocalJet(const ScaledSystem<R>& sys, const CriticalPoint<R>& cp) : sys_(&sys), S_(cp.z) {
        using std::abs;
        const auto& V = cp.eigenvectors;
        cplx<R> vx = V(0, 1);
        if (abs(vx) == 0) throw NumericalError("complex eigenvector has no x component");
        for (int i = 0; i < 3; ++i) {
            cplx<R> v = V(i, 1) / vx;
            P_(i, 0) = v.real();
            P_(i, 1) = v.imag();
            P_(i, 2) = V(i, 0).real();
        }
        R wn = P_.col(2).norm();
        P_.col(2) /= wn;
        Pinv_ = P_.inverse();
        a_ = cp.eigenvalues[1].real();
        omega_ = cp.eigenvalues[1].imag();
        lam_ = cp.eigenvalues[0].real();
        if (!(a_ * lam_ < 0)) throw NumericalError("eigenvalues of the saddle-focus do not have opposite signs");
        // Normal component of the quadratic part: q(xi) = 1/2 xi^T Hn xi.
        R Hn[2][2] = {{0, 0}, {0, 0}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 3; ++k) {
                    R acc = 0;
                    for (int p = 0; p < 3; ++p)
                        for (int q = 0; q < 3; ++q) {
                            R h = sys.jacobian_entry(k, p).derivative(q).eval(S_);
                            acc += h * P_(p, i) * P_(q, j);
                        }
                    Hn[i][j] += Pinv_(2, k) * acc;
                }
        // M B + B^T M - lam M = Hn / 2 with B = [[a, w], [-w, a]], unknowns (m11, m12, m22).
        const R B[2][2] = {{a_, omega_}, {-omega_, a_}};
        auto apply = [&](const R m[2][2], R out[2][2]) {
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    out[i][j] = -lam_ * m[i][j];
                    for (int k = 0; k < 2; ++k) out[i][j] += m[i][k] * B[k][j] + B[k][i] * m[k][j];
                }
        };
        Mat3 A;
        Eigen::Matrix<R, 3, 1> rhs(Hn[0][0] / 2, (Hn[0][1] + Hn[1][0]) / 4, Hn[1][1] / 2);
        for (int c = 0; c < 3; ++c) {
            R m[2][2] = {{0, 0}, {0, 0}};
            if (c == 0) m[0][0] = 1;
            if (c == 1) m[0][1] = m[1][0] = 1;
            if (c == 2) m[1][1] = 1;
            R out[2][2];
            apply(m, out);
            A(0, c) = out[0][0];
            A(1, c) = out[0][1];
            A(2, c) = out[1][1];
        }
        Eigen::Matrix<R, 3, 1> m = A.fullPivLu().solve(rhs);
        m11_ = m(0);
        m12_ = m(1);
        m22_ = m(2);
    }

    const std::array<R, 3>& center() const { return S_; }
    const R& tangent_rate() const { return a_; }
    const R& omega() const { return omega_; }
    const R& normal_rate() const { return lam_; }

    template <class T>
    T graph(const T& x1, const T& x2) const {
        return m11_ * x1 * x1 + 2 * m12_ * x1 * x2 + m22_ * x2 * x2;
    }

    template <class T>
    std::array<T, 3> point(const T& x1, const T& x2) const {
        const T eta = graph(x1, x2);
        std::array<T, 3> w;
        for (int i = 0; i < 3; ++i) w[i] = S_[i] + P_(i, 0) * x1 + P_(i, 1) * x2 + P_(i, 2) * eta;
        return w;
    }

    /// |normal field - Dh . tangent field| at the jet point over xi.
    R tangency_defect(const R& x1, const R& x2) const {
        using std::abs;
        auto w = point(x1, x2);
        auto X = sys_->template cartesian<R>(w);
        R F[3];
        for (int i = 0; i < 3; ++i) F[i] = Pinv_(i, 0) * X[0] + Pinv_(i, 1) * X[1] + Pinv_(i, 2) * X[2];
        const R h1 = 2 * (m11_ * x1 + m12_ * x2), h2 = 2 * (m12_ * x1 + m22_ * x2);
        return abs(F[2] - h1 * F[0] - h2 * F[1]);
    }

private:
    const ScaledSystem<R>* sys_;
    std::array<R, 3> S_;
    Mat3 P_, Pinv_;
    R a_ = 0, omega_ = 0, lam_ = 0;
    R m11_ = 0, m12_ = 0, m22_ = 0;
};

template <class R>
struct SeedRing {
    Branch side = Branch::unstable;
    R radius = 0;
    R phase0 = 0;
    std::vector<R> phi;                 // seed angles phase0 + 2 pi j / n
    std::vector<std::array<R, 3>> states;
};

/// n states on the jet over the circle |xi| = radius.
template <class R>
SeedRing<R> seed_local_manifold(const LocalJet<R>& jet, Branch side, const R& radius, int n, const R& phase0 = R(0)) {
    using std::cos;
    using std::sin;
    if (!(radius > 0) || !(radius < R(1) / 10)) throw ConfigError("seed radius must lie in (0, 0.1)");
    if ((side == Branch::unstable) != (jet.tangent_rate() > 0))
        throw NumericalError("seed side does not match the eigenvalues of the equilibrium");
    SeedRing<R> ring;
    ring.side = side;
    ring.radius = radius;
    ring.phase0 = phase0;
    for (int j = 0; j < n; ++j) {
        R phi = phase0 + 2 * pi<R>() * R(j) / R(n);
        ring.phi.push_back(phi);
        ring.states.push_back(jet.template point<R>(radius * cos(phi), radius * sin(phi)));
    }
    return ring;
}

template <class R>
struct ManifoldCurve {
    Branch side = Branch::unstable;
    R seed_radius = 0;
    std::vector<R> theta;       // section grid
    std::vector<R> r;           // r(theta_k)
    std::vector<R> cross_phi;   // seed angle of each trajectory
    std::vector<R> cross_theta; // unwrapped crossing angle
    std::vector<R> cross_r;
    std::vector<R> cross_t;     // flight time (signed)
    R fit_residual = 0;         // interpolation error estimate
};

template <class R>
struct GlobalizeOptions {
    R t_max = R(400);
    IvpOptions<R> ivp;
    int jobs = 1;
};

namespace detail {

template <class R>
Field<R, R> cartesian_field(const ScaledSystem<R>& sys) {
    return [&sys](const R&, const State<R>& y, State<R>& dy) {
        auto v = sys.template cartesian<R>({y[0], y[1], y[2]});
        dy[0] = v[0];
        dy[1] = v[1];
        dy[2] = v[2];
    };
}

}  // namespace detail

/// Flows each seed to the section (forward for the unstable side, backward for the stable one)
/// and resamples the crossing curve onto the section grid.
template <class R>
ManifoldCurve<R> globalize_to_section(const ScaledSystem<R>& sys, const SeedRing<R>& ring,
                                      const SectionSpec<R>& section, const PrecisionCtx& ctx,
                                      const GlobalizeOptions<R>& o = {}) {
    using std::abs;
    using std::atan2;
    using std::round;
    const std::size_t n = ring.states.size();
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("number of seeds must be a power of two >= 8");
    const bool unstable = ring.side == Branch::unstable;
    CrossingEvent<R> ev;
    ev.component = 2;
    ev.value = section.z_star;
    ev.direction = unstable ? +1 : -1;
    ev.required = true;
    std::vector<R> th(n), rr(n), tt(n);
    GbsIntegrator<R, R> gbs(detail::cartesian_field(sys), ctx, o.ivp);
    parallel_for(n, o.jobs, [&](std::size_t j) {
        const auto& s = ring.states[j];
        if ((s[2] - section.z_star) * (unstable ? 1 : -1) >= 0)
            throw NumericalError("seed already beyond the section");
        auto tr = gbs.integrate(State<R>{s[0], s[1], s[2]}, R(0), unstable ? o.t_max : -o.t_max, ev);
        if (!tr.event) throw NumericalError("trajectory did not reach the section (escape)");
        const auto& y = tr.event->y;
        rr[j] = (y[0] * y[0] + y[1] * y[1]) / 2;
        th[j] = atan2(y[1], y[0]);
        tt[j] = tr.event->t;
    });
    // Unwrap theta - phi along the ring; a monotone circle map is required.
    const R twopi = 2 * pi<R>();
    std::vector<R> g(n);
    for (std::size_t j = 0; j < n; ++j) {
        R gj = th[j] - ring.phi[j];
        if (j > 0) {
            while (gj - g[j - 1] > pi<R>()) gj -= twopi;
            while (gj - g[j - 1] < -pi<R>()) gj += twopi;
        }
        g[j] = gj;
    }
    {
        R closing = g[0] - g[n - 1];
        while (closing > pi<R>()) closing -= twopi;
        while (closing < -pi<R>()) closing += twopi;
        R wrap = g[0] - g[n - 1] - closing;
        if (abs(wrap) > R(1) / 1000) throw FoldDetected("crossing curve winds more than once around the axis");
    }
    for (std::size_t j = 0; j + 1 < n; ++j)
        if (!(ring.phi[j + 1] + g[j + 1] > ring.phi[j] + g[j]))
            throw FoldDetected("crossing curve is not a graph over theta");
    TrigInterpolant<R> gi(g), ri(rr);
    ManifoldCurve<R> c;
    c.side = ring.side;
    c.seed_radius = ring.radius;
    c.cross_phi = ring.phi;
    c.cross_theta.resize(n);
    for (std::size_t j = 0; j < n; ++j) c.cross_theta[j] = ring.phi[j] + g[j];
    c.cross_r = rr;
    c.cross_t = tt;
    R rmax_slope = 0;
    for (int k = 0; k < section.n_sec; ++k) {
        const R target = section.theta(k);
        // Solve phi + g(phi) = target (mod 2 pi) by Newton from the mean shift; the interpolants
        // are in x = phi - phase0.
        R x = target - ring.phase0 - gi.mode(0).real();
        for (int it = 0;; ++it) {
            R gv = gi.eval(x);
            R gd = gi.eval(x, 1);
            if (!(R(1) + gd > 0)) throw FoldDetected("crossing curve is not a graph over theta");
            R res = ring.phase0 + x + gv - target;
            res -= twopi * round(res / twopi);
            x -= res / (R(1) + gd);
            if (abs(res) <= R(64) * epsilon_of<R>()) break;
            if (it > 60) throw NumericalError("resampling onto the section grid did not converge");
        }
        c.theta.push_back(target);
        c.r.push_back(ri.eval(x));
        R slope = abs(ri.eval(x, 1) / (R(1) + gi.eval(x, 1)));
        rmax_slope = std::max(rmax_slope, slope);
    }
    c.fit_residual = ri.tail() + rmax_slope * gi.tail();
    return c;
}

}  // namespace sslab

#endif
