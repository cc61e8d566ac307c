#ifndef SSLAB_ASYMPTOTICS_LAW_HPP
#define SSLAB_ASYMPTOTICS_LAW_HPP

#include "sslab/model/unfolding.hpp"
#include "sslab/numerics/fit.hpp"
#include "sslab/stokes/extraction.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <type_traits>
#include <vector>

namespace sslab {

enum class LawCase { conservative, dissipative };

template <class R>
struct PredictedLaw {
    R alpha0 = 1, alpha3 = 0, d = 1, b = 1;
    R L0 = 0;
    cplx<R> c_star;  // C1* + i C2*
    bool phase_fitted = true;
    LawCase which = LawCase::dissipative;

    R exponent_rate() const { return alpha0 * pi<R>() / (2 * d); }
    R prefactor_power() const { return 1 + 2 / d; }
    R cosh_power() const { return 1 + 2 / d; }
    /// sqrt(gamma2 / (beta1 + 1)); sqrt(gamma2 / 2) in the conservative case
    R constant() const {
        using std::sqrt;
        return sqrt(b / (d + 1));
    }
};

template <class R>
PredictedLaw<R> make_law(const UnfoldingSpec<R>& spec, const StokesData<R>& sd) {
    PredictedLaw<R> law;
    law.alpha0 = spec.alpha0;
    law.alpha3 = spec.alpha3;
    law.d = spec.d;
    law.b = spec.b;
    law.L0 = sd.L0.real();
    law.c_star = sd.c_star;
    law.phase_fitted = sd.phase_fitted;
    law.which = spec.conservative ? LawCase::conservative : LawCase::dissipative;
    return law;
}

/// alpha0 v / sqrt(mu) + (alpha3 + alpha0 L0)/beta1 [log cosh(beta1 v) - log(mu)/2] + alpha0 L(v);
/// L defaults to 0 (exact at v = 0).
template <class R>
R theta_bar(const R& v, const R& mu, const PredictedLaw<R>& law,
            const std::function<R(const R&)>& L = nullptr) {
    using std::cosh;
    using std::log;
    using std::sqrt;
    if (!(mu > 0)) throw ConfigError("mu must be positive");
    R out = law.alpha0 * v / sqrt(mu) + (law.alpha3 + law.alpha0 * law.L0) / law.d * (log(cosh(law.d * v)) - log(mu) / 2);
    if (L) out += law.alpha0 * L(v);
    return out;
}

/// Upsilon_0^[l] for l = +-1..+-modes from Upsilon_in^[l] (l < 0); l > 0 by conjugation.
/// alpha is alpha(delta^2, delta sigma); a missing L_plus is taken as 0 (phase-fit mode).
template <class R>
std::map<int, cplx<R>> upsilon0_coeffs(const std::map<int, cplx<std::type_identity_t<R>>>& upsilon_in, const R& delta,
                                       const R& alpha, const R& c, const R& d,
                                       const cplx<std::type_identity_t<R>>& L0,
                                       const std::optional<cplx<std::type_identity_t<R>>>& L_plus) {
    using C = cplx<R>;
    using std::exp;
    using std::log;
    using std::pow;
    if (upsilon_in.empty()) throw ConfigError("no Upsilon_in coefficients given");
    if (!(delta > 0)) throw ConfigError("delta must be positive");
    const C I(0, 1);
    const C kappa = (C(c) + alpha * L0) / d;
    const C Lp = L_plus.value_or(C(0));
    std::map<int, C> out;
    for (const auto& [l, u] : upsilon_in) {
        if (l >= 0) throw ConfigError("Upsilon_in is given for l < 0 only");
        const R lr = R(l);
        C v = pow(delta, -2 - 2 / d) * std::pow(-I, C(2 / d)) * u *
              std::exp(kappa * (-I * lr * log(delta) + lr * pi<R>() / 2) - I * lr * alpha * Lp) *
              exp(lr * alpha * pi<R>() / (2 * d * delta));
        out[l] = v;
        out[-l] = std::conj(v);
    }
    return out;
}

template <class R>
std::map<int, cplx<R>> upsilon0_coeffs(const StokesData<R>& sd, const R& delta, const UnfoldingSpec<R>& spec,
                                       const R& sigma = R(0)) {
    std::map<int, cplx<R>> in;
    for (const auto& [l, e] : sd.upsilon) in[l] = e.value;
    return upsilon0_coeffs(in, delta, spec.alpha_of(delta, sigma), spec.c(), spec.d, sd.L0, sd.L_plus);
}

/// Leading-order distance of the manifolds in the original variables at (v, theta).
template <class R>
R predicted_distance(const R& v, const R& theta, const R& mu, const PredictedLaw<R>& law, LawCase which,
                     const std::function<R(const R&)>& L = nullptr) {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::pow;
    using std::sin;
    using std::sqrt;
    if (which != law.which) throw ConfigError("predicted_distance: case does not match the law");
    if (which == LawCase::conservative && law.d != 1) throw ConfigError("conservative law requires beta1 = 1");
    const R delta = sqrt(mu);
    const R th = theta + theta_bar(v, mu, law, L);
    const R bracket = law.c_star.real() * cos(th) + law.c_star.imag() * sin(th);
    return law.constant() * pow(cosh(law.d * v), law.cosh_power()) * pow(delta, -law.prefactor_power()) *
           exp(-law.exponent_rate() / delta) * bracket;
}

/// Amplitude of the first harmonic of predicted_distance.
template <class R>
R predicted_amplitude(const R& v, const R& mu, const PredictedLaw<R>& law) {
    using std::abs;
    using std::cosh;
    using std::exp;
    using std::pow;
    using std::sqrt;
    const R delta = sqrt(mu);
    return law.constant() * pow(cosh(law.d * v), law.cosh_power()) * pow(delta, -law.prefactor_power()) *
           exp(-law.exponent_rate() / delta) * abs(law.c_star);
}

/// 2|D_1| / (delta^{-2-2/d} cosh^{2/d}(d v) e^{-alpha pi/(2 d delta)} |C*|) for D = r^u - r^s in
/// scaled variables; alpha = alpha(delta^2, delta sigma).
template <class R>
R scaled_amplitude_ratio(const R& amp1, const R& delta, const R& v, const R& alpha, const R& d, const R& c_star_abs) {
    using std::cosh;
    using std::exp;
    using std::pow;
    const R pref = pow(delta, -2 - 2 / d) * pow(cosh(d * v), 2 / d) * exp(-alpha * pi<R>() / (2 * d * delta)) * c_star_abs;
    if (!(pref > 0)) throw NumericalError("scaled amplitude ratio needs C* != 0");
    return amp1 / pref;
}

/// One measured point for the fit: amplitude of the first harmonic and its phase.
template <class R>
struct LawSample {
    R delta = 0, v = 0;
    R amp = 0, error = 0;
    R phase = 0;  // arg of the first Fourier coefficient
};

template <class R>
struct FitOptions {
    bool weighted = false;  // weights amp / error in log space
};

template <class R>
struct FitReport {
    R rate_hat = 0, power_hat = 0, intercept = 0;
    R rate_target = 0, power_target = 0;
    R rate_rel_error = 0, power_rel_error = 0;
    std::vector<R> residuals;        // ln amp - model
    std::vector<R> predicted;        // predicted amplitude per point
    std::vector<R> ratio;            // amp / predicted
    std::vector<R> remainder_trend;  // |ratio - 1| log(1/delta)
    std::vector<R> phase_offset;     // theta_bar - phase, unwrapped
    R phase_hat = 0;                 // offset extrapolated to 1/log(1/delta) -> 0
    R band_A = 0;                    // smallest A with all ratios in [1 - A/log(1/delta), 1 + A/log(1/delta)]
    bool trend_ok = false;           // remainder trend non-increasing over the three smallest delta
};

/// Least squares ln amp = -rate/delta + power ln(1/delta) + const, compared to the law.
template <class R>
FitReport<R> fit_exponential_law(std::vector<LawSample<R>> pts, const PredictedLaw<R>& law,
                                 const FitOptions<R>& o = {}) {
    using std::abs;
    using std::log;
    using Mat = Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<R, Eigen::Dynamic, 1>;
    if (pts.size() < 4) throw ConfigError("exponential law fit needs at least 4 points");
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
    const R span = pts.front().delta / pts.back().delta;
    if (span < R(2)) throw ConfigError("exponential law fit needs 1/delta to span a factor 2");
    const std::size_t n = pts.size();
    Mat A(n, 3);
    Vec y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(pts[i].amp > 0)) throw NumericalError("fit needs positive amplitudes");
        A(i, 0) = -R(1) / pts[i].delta;
        A(i, 1) = log(R(1) / pts[i].delta);
        A(i, 2) = 1;
        y(i) = log(pts[i].amp);
        w(i) = o.weighted && pts[i].error > 0 ? pts[i].amp / pts[i].error : R(1);
    }
    Mat Aw = w.asDiagonal() * A;
    Vec yw = w.asDiagonal() * y;
    Eigen::JacobiSVD<Mat> svd(Aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(2) > sv(0) * R(1e-12))) throw NumericalError("ill-conditioned fit: delta grid too narrow");
    Vec p = svd.solve(yw);
    FitReport<R> rep;
    rep.rate_hat = p(0);
    rep.power_hat = p(1);
    rep.intercept = p(2);
    rep.rate_target = law.exponent_rate();
    rep.power_target = law.prefactor_power();
    rep.rate_rel_error = abs(rep.rate_hat - rep.rate_target) / rep.rate_target;
    rep.power_rel_error = abs(rep.power_hat - rep.power_target) / rep.power_target;
    Vec model = A * p;
    const R twopi = 2 * pi<R>();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = pts[i];
        rep.residuals.push_back(y(i) - model(i));
        const R pred = predicted_amplitude(s.v, s.delta * s.delta, law);
        rep.predicted.push_back(pred);
        const R ratio = pred > 0 ? s.amp / pred : R(0);
        rep.ratio.push_back(ratio);
        const R lg = log(R(1) / s.delta);
        rep.remainder_trend.push_back(abs(ratio - 1) * lg);
        rep.band_A = std::max(rep.band_A, abs(ratio - 1) * lg);
        R off = theta_bar(s.v, s.delta * s.delta, law) - s.phase;
        if (!rep.phase_offset.empty()) {
            while (off - rep.phase_offset.back() > pi<R>()) off -= twopi;
            while (off - rep.phase_offset.back() < -pi<R>()) off += twopi;
        }
        rep.phase_offset.push_back(off);
    }
    std::vector<R> x, ph;
    for (std::size_t i = 0; i < n; ++i) {
        x.push_back(R(1) / log(R(1) / pts[i].delta));
        ph.push_back(rep.phase_offset[i]);
    }
    rep.phase_hat = fit_line(x, ph).intercept;
    rep.trend_ok = true;
    for (std::size_t i = n - 2; i < n; ++i)
        if (rep.remainder_trend[i] > rep.remainder_trend[i - 1]) rep.trend_ok = false;
    return rep;
}

}  // namespace sslab

#endif
