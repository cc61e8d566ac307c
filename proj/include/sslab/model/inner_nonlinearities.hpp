#ifndef SSLAB_MODEL_INNER_NONLINEARITIES_HPP
#define SSLAB_MODEL_INNER_NONLINEARITIES_HPP

#include "sslab/model/unfolding.hpp"

#include <array>
#include <complex>

namespace sslab {

template <class R>
struct InnerTerms {
    cplx<R> F, G, H;        // F-hat, G-hat, H-hat
    cplx<R> dF, dG, dH;     // derivatives with respect to psi (filled on request)
    cplx<R> rho;
};

/// Evaluator for F-hat, G-hat, H-hat at (psi, s, theta, delta, sigma).
/// rho = sqrt((d+1)/b (delta^2 - s^-2) + 2 psi) is continued from the heteroclinic
/// branch delta*sqrt(2 R0(u(s))) = -i sqrt((d+1)/b) s^-1 sqrt(1 - delta^2 s^2).
template <class R>
class InnerNonlinearity {
public:
    explicit InnerNonlinearity(const UnfoldingSpec<R>& spec) : spec_(spec), k_((spec.d + 1) / spec.b) {
        for (int i = 0; i < 2; ++i) {
            grad_[0][i] = spec.f.derivative(i);
            grad_[1][i] = spec.g.derivative(i);
            grad_[2][i] = spec.h.derivative(i);
        }
        zero_ = spec.f.empty() && spec.g.empty() && spec.h.empty();
    }

    const UnfoldingSpec<R>& spec() const { return spec_; }
    bool trivial() const { return zero_; }

    cplx<R> rho_base(const cplx<R>& s, const R& delta) const {
        using std::sqrt;
        const cplx<R> I(0, 1);
        cplx<R> base = -I * sqrt(k_) / s;
        if (delta != 0) {
            cplx<R> w = cplx<R>(1) - delta * delta * s * s;
            cplx<R> root = std::sqrt(w);
            // On the cut (real s, |delta s| > 1) take the limit from Im s < 0, the side of the inner domains.
            if (w.imag() == 0 && w.real() < 0 && s.real() < 0) root = -root;
            base *= root;
        }
        return base;
    }

    cplx<R> rho(const cplx<R>& psi, const cplx<R>& s, const R& delta) const {
        using std::abs;
        cplx<R> base = rho_base(s, delta);
        cplx<R> q = R(2) * psi / (base * base);
        if (!(abs(q) < R(9) / 10))
            throw NumericalError("rho branch cannot be continued (|2 psi / rho0^2| >= 0.9)");
        return base * std::sqrt(cplx<R>(1) + q);
    }

    InnerTerms<R> eval(const cplx<R>& psi, const cplx<R>& s, const cplx<R>& theta, const R& delta, const R& sigma,
                       bool derivs = false) const {
        return eval_cs(psi, s, std::cos(theta), std::sin(theta), delta, sigma, derivs);
    }

    /// Same as eval with cos(theta), sin(theta) supplied.
    InnerTerms<R> eval_cs(const cplx<R>& psi, const cplx<R>& s, const cplx<R>& ct, const cplx<R>& st, const R& delta,
                          const R& sigma, bool derivs = false) const {
        InnerTerms<R> t;
        t.rho = rho(psi, s, delta);
        if (zero_) {
            t.F = t.G = t.H = t.dF = t.dG = t.dH = cplx<R>(0);
            return t;
        }
        std::array<cplx<R>, 5> xi{t.rho * ct, t.rho * st, cplx<R>(1) / s, cplx<R>(delta), cplx<R>(delta * sigma)};
        cplx<R> f = spec_.f.eval(xi), g = spec_.g.eval(xi), h = spec_.h.eval(xi);
        t.F = t.rho * (ct * f + st * g);
        t.G = (ct * g - st * f) / t.rho;
        t.H = h;
        if (derivs) {
            // d rho / d psi = 1/rho, d xi_{1,2} / d psi = (cos, sin)/rho
            cplx<R> ir = cplx<R>(1) / t.rho;
            auto dpoly = [&](int k) { return (grad_[k][0].eval(xi) * ct + grad_[k][1].eval(xi) * st) * ir; };
            cplx<R> df = dpoly(0), dg = dpoly(1), dh = dpoly(2);
            t.dF = ir * (ct * f + st * g) + t.rho * (ct * df + st * dg);
            t.dG = (ct * dg - st * df) * ir - (ct * g - st * f) * ir * ir * ir;
            t.dH = dh;
        } else {
            t.dF = t.dG = t.dH = cplx<R>(0);
        }
        return t;
    }

private:
    UnfoldingSpec<R> spec_;
    R k_;
    std::array<std::array<Poly5<R>, 2>, 3> grad_;
    bool zero_ = false;
};

}  // namespace sslab

#endif
