#ifndef SSLAB_MODEL_CRITICAL_POINTS_HPP
#define SSLAB_MODEL_CRITICAL_POINTS_HPP

#include "sslab/model/scaled.hpp"
#include "sslab/numerics/precision.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <array>
#include <string>

namespace sslab {

template <class R>
struct CriticalPoint {
    std::array<R, 3> z;
    R residual;
    int iterations;
    std::array<cplx<R>, 3> eigenvalues;  // [0] real, [1], [2] the complex pair (Im [1] > 0)
    Eigen::Matrix<cplx<R>, 3, 3> eigenvectors;  // columns match eigenvalues
};

namespace detail {

template <class R>
R norm3(const std::array<R, 3>& v) {
    using std::abs;
    return std::max({abs(v[0]), abs(v[1]), abs(v[2])});
}

template <class R>
CriticalPoint<R> newton_equilibrium(const ScaledSystem<R>& sys, std::array<R, 3> z, const PrecisionCtx& ctx) {
    using Mat = Eigen::Matrix<R, 3, 3>;
    using Vec = Eigen::Matrix<R, 3, 1>;
    const R tol = R(ctx.rel_tol());
    auto F = sys.template cartesian<R>(z);
    R res = norm3(F);
    for (int it = 1; it <= 50; ++it) {
        auto J = sys.template jacobian<R>(z);
        Mat A;
        Vec rhs;
        for (int i = 0; i < 3; ++i) {
            rhs(i) = -F[i];
            for (int j = 0; j < 3; ++j) A(i, j) = J[i][j];
        }
        Vec dz = A.fullPivLu().solve(rhs);
        R lam = 1;
        std::array<R, 3> trial;
        R trial_res;
        for (;;) {
            for (int i = 0; i < 3; ++i) trial[i] = z[i] + lam * dz(i);
            trial_res = norm3(sys.template cartesian<R>(trial));
            if (trial_res < res || lam < R(1) / 1024) break;
            lam /= 2;
        }
        R step = lam * std::max({abs(dz(0)), abs(dz(1)), abs(dz(2))});
        z = trial;
        F = sys.template cartesian<R>(z);
        res = trial_res;
        if (!is_finite(res)) break;
        if (step <= tol && res <= tol) return {z, res, it, {}, {}};
    }
    throw NumericalError("Newton for the critical point did not converge (residual " + to_sci(res, 6) + ")");
}

}  // namespace detail

/// Both equilibria S- (near z=-1) and S+ (near z=+1) with their linearizations.
template <class R>
std::pair<CriticalPoint<R>, CriticalPoint<R>> critical_points(const ScaledSystem<R>& sys, const PrecisionCtx& ctx) {
    using std::abs;
    std::pair<CriticalPoint<R>, CriticalPoint<R>> out;
    for (int k = 0; k < 2; ++k) {
        CriticalPoint<R> cp = detail::newton_equilibrium(sys, {R(0), R(0), R(k == 0 ? -1 : 1)}, ctx);
        auto J = sys.template jacobian<R>(cp.z);
        Eigen::Matrix<R, 3, 3> A;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) A(i, j) = J[i][j];
        Eigen::EigenSolver<Eigen::Matrix<R, 3, 3>> es(A);
        if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition failed at critical point");
        auto ev = es.eigenvalues();
        auto V = es.eigenvectors();
        int ireal = 0;
        for (int i = 1; i < 3; ++i)
            if (abs(ev(i).imag()) < abs(ev(ireal).imag())) ireal = i;
        std::array<int, 2> pair{};
        int n = 0;
        for (int i = 0; i < 3; ++i)
            if (i != ireal) pair[n++] = i;
        if (ev(pair[0]).imag() < 0) std::swap(pair[0], pair[1]);
        const R scale = std::max(abs(ev(pair[0])), R(1));
        if (!(ev(pair[0]).imag() > R(1000) * epsilon_of<R>() * scale))
            throw NumericalError("critical point is not a saddle-focus (no complex pair)");
        std::array<int, 3> order{ireal, pair[0], pair[1]};
        for (int i = 0; i < 3; ++i) {
            cp.eigenvalues[i] = cplx<R>(ev(order[i]).real(), ev(order[i]).imag());
            for (int j = 0; j < 3; ++j) cp.eigenvectors(j, i) = cplx<R>(V(j, order[i]).real(), V(j, order[i]).imag());
        }
        cp.eigenvalues[0] = cplx<R>(cp.eigenvalues[0].real(), R(0));
        (k == 0 ? out.first : out.second) = cp;
    }
    return out;
}

}  // namespace sslab

#endif
