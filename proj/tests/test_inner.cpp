#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "sslab/inner/verify.hpp"
#include "sslab/numerics/quadrature.hpp"

#include <cmath>

using namespace sslab;

namespace {

using LD = long double;

const InnerSolution<LD>& cached_solution(const char* which, Branch b) {
    static std::map<std::pair<std::string, int>, InnerSolution<LD>> cache;
    auto key = std::make_pair(std::string(which), static_cast<int>(b));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const std::string w(which);
    ModelConfig cfg = w == "cons"   ? fixtures::conservative_model()
                      : w == "rev" ? fixtures::reversible_model()
                                   : fixtures::dissipative_model();
    InnerNonlinearity<LD> nl(make_unfolding<LD>(cfg));
    InnerDomainSpec<LD> dom;
    dom.branch = b;
    return cache.emplace(key, solve_inner(nl, dom, InnerOptions<LD>{})).first->second;
}

template <class R>
std::shared_ptr<const PanelPath<R>> unstable_line(const R& rho) {
    InnerOptions<R> o;
    return std::make_shared<const PanelPath<R>>(make_horizontal_path<R>(
        cplx<R>(0, -rho), -1, o.reach_factor * rho, o.path, shared_rule<R>(o.path.nodes_per_panel)));
}

}  // namespace

TEST_CASE("L annihilates its kernel") {
    PrecisionScope scope{192};
    using R = mp_real;
    for (R d : {R(1), R(3) / 2})
        for (int l = -3; l <= 3; ++l) {
            R r = kernel_residual<R>(R(1), d, l, +1, cplx<R>(-3, -8), cplx<R>(4, -9));
            CHECK(r < R(1e-25));
        }
    // with the opposite exponent sign only l = 0 lies in the kernel
    CHECK(kernel_residual<R>(R(1), R(1), 1, -1, cplx<R>(-3, -8), cplx<R>(4, -9)) > R(1) / 2);
}

TEST_CASE("L on a power law") {
    PrecisionScope scope{192};
    using R = mp_real;
    using C = cplx<R>;
    PathOptions<R> po;
    po.seg_h_max = R(1);
    auto path = std::make_shared<const PanelPath<R>>(make_segment_path<R>(C(-5, -8), C(5, -8), po, shared_rule<R>(40)));
    FourierOnPath<R> f(path, 2);
    for (std::size_t i = 0; i < f.size(); ++i) f.at(i, 0) = C(1) / (f.s(i) * f.s(i) * f.s(i));
    auto Lf = apply_L(f, R(1), R(1));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const C s2 = f.s(i) * f.s(i);
        C expect = R(-5) / (s2 * s2);
        CHECK(std::abs(Lf.at(i, 0) - expect) < R(1e-30) * std::abs(expect));
    }
}

TEST_CASE("G of w^-4 in closed form") {
    PrecisionScope scope{192};
    using R = mp_real;
    using C = cplx<R>;
    // the error is set by the collocation of the tail panel and falls off spectrally with nodes
    std::vector<R> worst;
    for (int n : {24, 32, 48}) {
        InnerOptions<R> o;
        o.path.nodes_per_panel = n;
        auto path = std::make_shared<const PanelPath<R>>(
            make_horizontal_path<R>(C(0, -8), -1, o.reach_factor * 8, o.path, shared_rule<R>(n)));
        ModeSolver<R> ms(path, R(1), R(1), 2);
        FourierOnPath<R> phi(path, 1);
        for (std::size_t i = 0; i < phi.size(); ++i) {
            const C s2 = phi.s(i) * phi.s(i);
            phi.at(i, 0) = C(1) / (s2 * s2);
        }
        auto g = right_inverse_G(phi, ms);
        R w = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            C expect = -C(1) / (R(5) * g.s(i) * g.s(i) * g.s(i));
            w = std::max<R>(w, abs(g.at(i, 0) - expect) / abs(expect));
        }
        worst.push_back(w);
    }
    CHECK(worst[0] < R(1e-14));
    CHECK(worst[1] < worst[0] * R(1e-5));
    CHECK(worst[2] < R(1e-30));
}

TEST_CASE("L(G(phi)) = phi over the decay-order battery") {
    PrecisionScope scope{192};
    using R = mp_real;
    for (R d : {R(1), R(3) / 2}) {
        auto res = right_inverse_battery<R>(R(1), d, R(8));
        CHECK(res.cases == 5);
        CHECK(res.worst < R(1e-10));
    }
}

TEST_CASE("G agrees with contour quadrature of the integral") {
    PrecisionScope scope{192};
    using R = mp_real;
    using C = cplx<R>;
    PrecisionCtx ctx(192, 1e-40, 1e-40);
    for (R d : {R(1), R(3) / 2}) {
        const R alpha(1);
        auto path = unstable_line<R>(R(8));
        ModeSolver<R> ms(path, alpha, d, 2);
        const int N = 3;
        FourierOnPath<R> phi(path, N);
        auto phi_l = [&](int l, const C& w) { return std::pow(w, C(-4)) + R(3) / 10 * R(l + 4) * std::pow(w, C(-5)); };
        for (std::size_t i = 0; i < phi.size(); ++i)
            for (int l = -N; l <= N; ++l) phi.at(i, l) = phi_l(l, phi.s(i));
        auto g = right_inverse_G(phi, ms);
        for (std::size_t i : {path->size() - 1, path->size() - 200, path->size() - 400}) {
            const C s = path->s[i];
            for (int l = -N; l <= N; ++l) {
                // integrand of (1/d) int (s/w)^{2/d} e^{i l alpha (s-w)/d} phi_l(w) dw
                std::function<C(const C&)> f = [&](const C& w) {
                    return std::pow(s / w, C(R(2) / d)) * std::exp(C(0, l) * alpha * (s - w) / d) * phi_l(l, w) / d;
                };
                ComplexPath<R> cp;
                if (l == 0)
                    cp = ComplexPath<R>::tail_into(s, C(-1));
                else if (l > 0)
                    cp = ComplexPath<R>::tail_into(s, C(0, -1));
                else if (d == 1 && s.real() < 0)
                    cp = ComplexPath<R>::tail_into(s, C(0, 1));
                else
                    continue;
                C ref = quadrature_path<R>(f, cp, R(4), ctx);
                CHECK(std::abs(g.at(i, l) - ref) < R(1e-15) * std::abs(ref));
            }
        }
    }
}

TEST_CASE("G keeps the weight on non-mean modes and loses one power on the mean") {
    PrecisionScope scope{128};
    using R = mp_real;
    using C = cplx<R>;
    auto path = unstable_line<R>(R(8));
    ModeSolver<R> ms(path, R(1), R(1), 2);
    FourierOnPath<R> p1(path, 1), p0(path, 1);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        p1.at(i, 1) = std::pow(p1.s(i), C(-4));
        p0.at(i, 0) = std::pow(p0.s(i), C(-4));
    }
    auto g1 = right_inverse_G(p1, ms), g0 = right_inverse_G(p0, ms);
    CHECK(g1.weighted_sup(R(4)) < 2 * p1.weighted_sup(R(4)));
    CHECK(g0.weighted_sup(R(3)) < p0.weighted_sup(R(4)));
    CHECK(g0.weighted_sup(R(4)) > 100 * p0.weighted_sup(R(4)));
}

TEST_CASE("M(0,0) decays like |s|^-4") {
    InnerNonlinearity<LD> nl(make_unfolding<LD>(fixtures::conservative_model()));
    auto path = unstable_line<LD>(8.0L);
    MEvaluator<LD> ev(nl, 16);
    FourierOnPath<LD> zero(path, 16);
    auto m = apply_M(zero, zero, 0.0L, 0.0L, ev);
    std::vector<LD> x, y;
    for (std::size_t i = 0; i < zero.size(); ++i) {
        LD a = std::abs(zero.s(i));
        if (a < 16 || a > 160) continue;
        x.push_back(std::log(a));
        y.push_back(std::log(m.value.norm_at(i)));
    }
    auto fit = fit_line(x, y);
    CHECK(fit.slope >= -4.3L);
    CHECK(fit.slope <= -3.7L);
    CHECK(m.overflow < 1e-12L);
    CHECK_THROWS_AS(apply_M(zero, zero, 0.0L, 1.0L, ev), ConfigError);
}

TEST_CASE("theta products match the dense-grid convolution") {
    using C = cplx<LD>;
    InnerNonlinearity<LD> nl(make_unfolding<LD>(fixtures::dissipative_model()));
    const C s(1.5L, -9.0L);
    const C psi1(2e-4L, -1e-4L);  // psi = psi1 e^{i theta}
    const int dense = 512;
    std::vector<C> gmodes(dense, C(0));
    for (int j = 0; j < dense; ++j) {
        const LD th = 2 * pi<LD>() * j / dense;
        C psi = psi1 * std::exp(C(0, th));
        C G = nl.eval(psi, s, C(th), 0.0L, 0.0L).G;
        for (int l = -4; l <= 4; ++l) gmodes[l + 4] += G * std::exp(C(0, -l * th)) / LD(dense);
    }
    // pseudo-spectral product on the 4N grid
    const int N = 16;
    ThetaGrid<LD> tg(N);
    std::vector<C> prod(tg.size());
    for (int j = 0; j < tg.size(); ++j) {
        const LD th = tg.theta(j);
        C psi = psi1 * std::exp(C(0, th));
        prod[j] = nl.eval(psi, s, C(th), 0.0L, 0.0L).G * (C(0, 1) * psi);
    }
    std::vector<C> pm;
    tg.to_modes(prod, pm);
    // (G d_theta psi)^[m] = G^[m-1] i psi1
    for (int m : {0, 2}) {
        C expect = gmodes[m - 1 + 4] * C(0, 1) * psi1;
        CHECK(std::abs(pm[m + N] - expect) < 1e-14L * std::abs(expect));
    }
}

TEST_CASE("zero perturbation gives psi = 0 after one iteration") {
    InnerNonlinearity<LD> nl(make_unfolding<LD>(fixtures::zero_model()));
    auto sol = solve_inner(nl, InnerDomainSpec<LD>{}, InnerOptions<LD>{});
    CHECK(sol.corrections.front() == 0);
    CHECK(sol.psi().weighted_sup(0) == 0);
}

TEST_CASE("inner solution decay exponents") {
    const auto& sol = cached_solution("cons", Branch::unstable);
    auto rep = decay_report(sol, 16.0L, 160.0L);
    CHECK(rep.psi.slope >= -3.2L);
    CHECK(rep.psi.slope <= -2.8L);
    CHECK(rep.remainder.slope <= -3.7L);
}

TEST_CASE("fixed-point residual and contraction") {
    for (const char* which : {"cons", "diss"}) {
        const auto& sol = cached_solution(which, Branch::unstable);
        CHECK(sol.residual < 1e-9L);
        REQUIRE(sol.ratios.size() >= 2);
        for (std::size_t k = 0; k < 4; ++k) CHECK(sol.ratios[k] < 0.5L);
        CHECK(sol.overflow < 1e-4L);
    }
}

TEST_CASE("unstable and stable solutions of the reversible sample are mirror images in norm") {
    const auto& u = cached_solution("rev", Branch::unstable);
    const auto& s = cached_solution("rev", Branch::stable);
    auto ru = decay_report(u, 16.0L, 160.0L), rs = decay_report(s, 16.0L, 160.0L);
    CHECK(std::abs(ru.psi.slope - rs.psi.slope) < 0.01L * std::abs(ru.psi.slope));
    const auto& pu = u.psi();
    const auto& ps = s.psi();
    REQUIRE(pu.size() == ps.size());
    for (std::size_t i = 0; i < pu.size(); i += 97)
        CHECK(std::abs(pu.norm_at(i) - ps.norm_at(i)) < 0.01L * pu.norm_at(i));
}

TEST_CASE("solutions on different admissible paths agree") {
    InnerNonlinearity<LD> nl(make_unfolding<LD>(fixtures::dissipative_model()));
    InnerDomainSpec<LD> dom;
    InnerOptions<LD> o;
    o.margin = 4;  // horizontal line through -12i
    auto line = solve_inner(nl, dom, o);
    auto ray = solve_inner_ray(nl, dom, cplx<LD>(0, -8), cplx<LD>(0, -20), InnerOptions<LD>{});
    const auto& leg = ray.ray();
    std::size_t k = 0;
    while (leg.psi.s(k).imag() > -12) ++k;
    REQUIRE(std::abs(leg.psi.s(k) - cplx<LD>(0, -12)) < 1e-15L);
    const auto& pl = line.psi();
    LD diff = 0;
    for (int l = -16; l <= 16; ++l) diff += std::abs(pl.at(pl.size() - 1, l) - leg.psi.at(k, l));
    const LD tol = 1e5L * std::numeric_limits<LD>::epsilon();  // default solver tolerance
    CHECK(diff * std::pow(12.0L, 3) < 10 * tol);
}

TEST_CASE("contraction threshold by bisection") {
    InnerNonlinearity<LD> nl(make_unfolding<LD>(fixtures::dissipative_model()));
    InnerOptions<LD> o;
    o.reach_factor = 100;
    InnerDomainSpec<LD> dom;
    LD r1 = rho_contract(nl, dom, o, 1.0L, 16.0L, 0.5L);
    LD r2 = rho_contract(nl, dom, o, 1.0L, 16.0L, 0.5L);
    CHECK(r1 == r2);
    dom.rho_in = r1;
    o.max_iter = 6;
    o.require_contraction = false;
    auto sol = solve_inner(nl, dom, o);
    for (const auto& r : sol.ratios) CHECK(r < 0.5L);
}
