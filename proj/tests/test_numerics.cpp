#include <catch_amalgamated.hpp>

#include "sslab/numerics/extrapolate.hpp"
#include "sslab/numerics/fft.hpp"
#include "sslab/numerics/ivp.hpp"
#include "sslab/numerics/quadrature.hpp"
#include "sslab/numerics/rules.hpp"

using namespace sslab;
using R = mp_real;
using C = cplx<R>;

namespace {

struct Prec192 {
    PrecisionScope scope{192};
};

}  // namespace

TEST_CASE("precision context validates its invariants", "[numerics]") {
    CHECK_THROWS_AS(PrecisionCtx(32, 1e-10, 1e-10), ConfigError);
    CHECK_THROWS_AS(PrecisionCtx(64, 1e-30, 1e-10), ConfigError);
    CHECK_THROWS_AS(PrecisionCtx(192, -1.0, 1e-10), ConfigError);
    PrecisionCtx ok(192, 1e-40, 1e-40);
    CHECK(ok.mantissa_bits() == 192);
}

TEST_CASE("gauss rule integrates polynomials exactly", "[numerics]") {
    Prec192 p;
    GaussRule<R> g(20);
    R acc = 0;
    for (int i = 0; i < g.size(); ++i) acc += g.w[i] * pow(g.x[i], 38);
    CHECK(abs(acc - R(2) / 39) < R("1e-55"));
}

TEST_CASE("panel rule differentiates and integrates", "[numerics]") {
    Prec192 p;
    PanelRule<R> pr(24);
    // f(t) = exp(t): derivative and cumulative integral.
    std::vector<R> f(pr.n);
    for (int j = 0; j < pr.n; ++j) f[j] = exp(pr.t[j]);
    R derr = 0, ierr = 0;
    for (int i = 0; i < pr.n; ++i) {
        R d = 0, s = 0;
        for (int j = 0; j < pr.n; ++j) {
            d += pr.D[i][j] * f[j];
            s += pr.S[i][j] * f[j];
        }
        derr = std::max<R>(derr, abs(d - f[i]));
        ierr = std::max<R>(ierr, abs(s - (f[i] - 1)));
    }
    CHECK(derr < R("1e-20"));
    CHECK(ierr < R("1e-25"));
    auto w = pr.interp_weights(R("0.3"));
    R v = 0;
    for (int j = 0; j < pr.n; ++j) v += w[j] * f[j];
    CHECK(abs(v - exp(R("0.3"))) < R("1e-25"));
}

TEST_CASE("fft round trip and mode placement", "[numerics]") {
    Prec192 p;
    FFTPlan<R> plan(16);
    std::vector<C> modes(7, C(0)), grid, back;
    modes[3 + 1] = C(R(2), R(1));
    modes[3 - 2] = C(R(-1), R(0));
    plan.modes_to_grid(modes, 3, grid);
    R th = 2 * pi<R>() * 5 / 16;
    C expect = C(R(2), R(1)) * std::exp(C(0, th)) + C(R(-1), R(0)) * std::exp(C(0, -2 * th));
    CHECK(abs(grid[5] - expect) < R("1e-50"));
    R lost = plan.grid_to_modes(grid, 3, back);
    CHECK(lost < R("1e-50"));
    CHECK(abs(back[4] - modes[4]) < R("1e-50"));
}

TEST_CASE("integrate_ivp: exponential flow", "[numerics]") {
    Prec192 p;
    PrecisionCtx ctx(192, 1e-45, 1e-45);
    Field<R, R> f = [](const R&, const State<R>& y, State<R>& dy) { dy[0] = y[0]; };
    auto tr = integrate_ivp<R, R>(f, {R(1)}, R(0), R(1), ctx);
    CHECK(abs(tr.back()[0] - exp(R(1))) < R("1e-43"));
    auto mid = tr.state_at(R("0.37"));
    CHECK(abs(mid[0] - exp(R("0.37"))) < R("1e-43"));
}

TEST_CASE("integrate_ivp: y' = -y^2 and tolerance scaling", "[numerics]") {
    Prec192 p;
    Field<R, R> f = [](const R&, const State<R>& y, State<R>& dy) { dy[0] = -y[0] * y[0]; };
    R e_loose, e_tight;
    {
        PrecisionCtx ctx(192, 1e-20, 1e-20);
        IvpOptions<R> o;
        o.stages = 4;
        auto tr = integrate_ivp<R, R>(f, {R(1)}, R(0), R(3), ctx, std::nullopt, o);
        e_loose = abs(tr.back()[0] - R(1) / 4);
        CHECK(e_loose < R("1e-18"));
    }
    {
        PrecisionCtx ctx(192, 1e-28, 1e-28);
        IvpOptions<R> o;
        o.stages = 4;
        auto tr = integrate_ivp<R, R>(f, {R(1)}, R(0), R(3), ctx, std::nullopt, o);
        e_tight = abs(tr.back()[0] - R(1) / 4);
    }
    // Tightening the tolerance by 1e8 must buy at least 1e6 in accuracy.
    CHECK(e_tight * R("1e6") < std::max<R>(e_loose, R("1e-40")));
}

TEST_CASE("integrate_ivp: event location", "[numerics]") {
    Prec192 p;
    PrecisionCtx ctx(192, 1e-40, 1e-40);
    // x' = 1: crossing x = 0.5 at t = 0.5.
    Field<R, R> f = [](const R&, const State<R>&, State<R>& dy) { dy[0] = 1; };
    CrossingEvent<R> ev{0, R("0.5"), +1, true};
    auto tr = integrate_ivp<R, R>(f, {R(0)}, R(0), R(2), ctx, ev);
    REQUIRE(tr.event);
    CHECK(abs(tr.event->t - R("0.5")) < R("1e-38"));
    CrossingEvent<R> never{0, R(5), +1, true};
    CHECK_THROWS_AS((integrate_ivp<R, R>(f, {R(0)}, R(0), R(2), ctx, never)), NumericalError);
}

TEST_CASE("integrate_ivp: step underflow at a blow-up", "[numerics]") {
    Prec192 p;
    PrecisionCtx ctx(192, 1e-30, 1e-30);
    Field<R, R> f = [](const R&, const State<R>& y, State<R>& dy) { dy[0] = y[0] * y[0]; };
    CHECK_THROWS_AS((integrate_ivp<R, R>(f, {R(1)}, R(0), R(2), ctx)), NumericalError);
}

TEST_CASE("quadrature_path closed forms", "[numerics]") {
    Prec192 p;
    PrecisionCtx ctx(192, 1e-45, 1e-45);
    C s(R(-3), R(-2));
    auto path = ComplexPath<R>::tail_into(s, C(-1));
    std::function<C(const C&)> f = [](const C& w) { return pow(w, -6); };
    C got = quadrature_path<R>(f, path, R(6), ctx);
    C want = -pow(s, -5) / R(5);
    CHECK(abs(got - want) < R("1e-44"));

    auto seg = ComplexPath<R>::from_nodes({C(0), C(pi<R>())});
    std::function<C(const C&)> g = [](const C& w) { return exp(C(0, 1) * w); };
    C v = quadrature_path<R>(g, seg, R(0), ctx);
    CHECK(abs(v - C(0, 2)) < R("1e-43"));

    CHECK_THROWS_AS(quadrature_path<R>(f, path, R(1), ctx), NumericalError);
    std::function<C(const C&)> bad = [](const C& w) { return C(R(1) / (w.real() - R(1)) * R(0) / R(0)); };
    CHECK_THROWS_AS(quadrature_path<R>(bad, seg, R(0), ctx), NumericalError);
}

TEST_CASE("quadrature path independence", "[numerics]") {
    Prec192 p;
    PrecisionCtx ctx(192, 1e-40, 1e-40);
    std::function<C(const C&)> f = [](const C& w) { return exp(w) / (w * w + R(4)); };
    auto p1 = ComplexPath<R>::from_nodes({C(R(-1), R(0)), C(R(1), R(0))});
    auto p2 = ComplexPath<R>::from_nodes({C(R(-1), R(0)), C(R(0), R(1)), C(R(1), R(0))});
    C a = quadrature_path<R>(f, p1, R(0), ctx), b = quadrature_path<R>(f, p2, R(0), ctx);
    CHECK(abs(a - b) < R("1e-39"));
}

TEST_CASE("extrapolate_limit examples", "[numerics]") {
    Prec192 p;
    std::vector<std::pair<R, C>> lin = {{R("0.1"), C(R(2) + 5 * R("0.1"))},
                                        {R("0.05"), C(R(2) + 5 * R("0.05"))},
                                        {R("0.025"), C(R(2) + 5 * R("0.025"))}};
    auto e1 = extrapolate_limit<R>(lin, R(1));
    CHECK(abs(e1.value - C(2)) < R("1e-50"));
    std::vector<std::pair<R, C>> quad;
    for (R x : {R("0.2"), R("0.1"), R("0.05")}) quad.push_back({x, C(1 + x * x)});
    auto e2 = extrapolate_limit<R>(quad, R(2));
    CHECK(abs(e2.value - C(1)) < R("1e-50"));
    CHECK_THROWS_AS(extrapolate_limit<R>({{R(1), C(1)}, {R("0.5"), C(1)}}, R(1)), NumericalError);
    CHECK_THROWS_AS(extrapolate_limit<R>({{R(1), C(1)}, {R(2), C(1)}, {R("0.5"), C(1)}}, R(1)), NumericalError);
}

TEST_CASE("precision monotonicity of the quadrature", "[numerics]") {
    C v192, v256;
    std::function<C(const C&)> f = [](const C& w) { return pow(w, -6); };
    {
        PrecisionScope s(192);
        PrecisionCtx ctx(192, 1e-45, 1e-45);
        v192 = quadrature_path<R>(f, ComplexPath<R>::tail_into(C(R(-3), R(-2)), C(-1)), R(6), ctx);
    }
    {
        PrecisionScope s(256);
        PrecisionCtx ctx(256, 1e-45, 1e-45);
        v256 = quadrature_path<R>(f, ComplexPath<R>::tail_into(C(R(-3), R(-2)), C(-1)), R(6), ctx);
    }
    PrecisionScope s(256);
    CHECK(abs(v192 - v256) < R("1e-44"));
}

TEST_CASE("long double instantiation", "[numerics]") {
    using L = long double;
    PrecisionCtx ctx(64, 1e-16, 1e-16);
    Field<L, L> f = [](const L&, const State<L>& y, State<L>& dy) { dy[0] = y[0]; };
    auto tr = integrate_ivp<L, L>(f, {1.0L}, 0.0L, 1.0L, ctx);
    CHECK(std::abs(tr.back()[0] - std::exp(1.0L)) < 1e-15L);
}
