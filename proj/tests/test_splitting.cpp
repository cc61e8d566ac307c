#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "sslab/model/critical_points.hpp"
#include "sslab/model/inner_nonlinearities.hpp"
#include "sslab/splitting/matching.hpp"
#include "sslab/splitting/measure.hpp"

#include <cmath>
#include <map>

using namespace sslab;
using LD = long double;

namespace {

const PrecisionCtx& ld_ctx() {
    static const PrecisionCtx c = PrecisionCtx::for_bits(64);
    return c;
}

const UnfoldingSpec<LD>& conservative() {
    static const auto s = make_unfolding<LD>(fixtures::conservative_model());
    return s;
}

const UnfoldingSpec<LD>& dissipative() {
    static const auto s = make_unfolding<LD>(fixtures::dissipative_model());
    return s;
}

const SplittingEntry<LD>& cons_entry(LD delta, LD v = 0, int n = 64) {
    static std::map<std::tuple<LD, LD, int>, SplittingEntry<LD>> cache;
    auto key = std::make_tuple(delta, v, n);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, measure_splitting(conservative(), delta * delta, LD(0),
                                                  make_section(conservative(), v, n), ld_ctx()))
                 .first;
    return it->second;
}

}  // namespace

TEST_CASE("precision policy", "[splitting]") {
    CHECK(policy_bits(0.5) == 192u);
    CHECK(policy_bits(0.2) == 192u);
    // 10 (pi / 0.18) / ln 2 + 64 = 315.8
    CHECK(policy_bits(0.09) == 316u);
    CHECK(policy_bits(0.05) > policy_bits(0.09));
    CHECK_THROWS_AS(policy_bits(0.0), ConfigError);
}

TEST_CASE("section validation", "[splitting]") {
    const auto& sp = conservative();
    CHECK_THROWS_AS(make_section(sp, LD(0), 48), ConfigError);
    CHECK_THROWS_AS(make_section(sp, LD(0), 4), ConfigError);
    auto s = make_section(sp, LD(0.3), 32);
    CHECK(std::abs(s.z_star - std::tanh(sp.d * LD(0.3))) < 1e-18L);
    CHECK(std::abs(s.theta(8) - std::acos(LD(-1)) / 2) < 1e-18L);
}

TEST_CASE("local jet tangency defect is third order", "[splitting]") {
    PrecisionScope p(192);
    using R = mp_real;
    auto spec = make_unfolding<R>(fixtures::conservative_model());
    auto ctx = PrecisionCtx::for_bits(192);
    auto sys = scale_system(spec, R("0.01"), R(0));
    auto cps = critical_points(sys, ctx);
    for (const auto& cp : {cps.first, cps.second}) {
        LocalJet<R> jet(sys, cp);
        const R r1("1e-3"), r2 = r1 / 2;
        // sup over the ring; single angles can sit where the cubic term nearly vanishes
        R d1 = 0, d2 = 0;
        for (int k = 0; k < 32; ++k) {
            const R phi = 2 * pi<R>() * k / 32;
            d1 = std::max<R>(d1, jet.tangency_defect(r1 * cos(phi), r1 * sin(phi)));
            d2 = std::max<R>(d2, jet.tangency_defect(r2 * cos(phi), r2 * sin(phi)));
        }
        const R ratio = d1 / d2;
        CHECK(ratio > 6);
        CHECK(ratio < 10);
    }
}

TEST_CASE("seed ring lies on the jet near the equilibrium", "[splitting]") {
    auto spec = make_unfolding<LD>(fixtures::zero_model());
    auto sys = scale_system(spec, LD(0.01), LD(0));
    auto cps = critical_points(sys, ld_ctx());
    LocalJet<LD> ju(sys, cps.first), js(sys, cps.second);
    const LD rad = 1e-3L;
    auto ring = seed_local_manifold(ju, Branch::unstable, rad, 16);
    REQUIRE(ring.states.size() == 16);
    for (const auto& s : ring.states) {
        const LD dz = std::abs(s[2] - cps.first.z[2]);
        const LD dxy = std::hypot(s[0] - cps.first.z[0], s[1] - cps.first.z[1]);
        CHECK(dz <= 10 * rad * rad);
        CHECK(dxy > rad / 10);
        CHECK(dxy < 10 * rad);
    }
    CHECK_THROWS_AS(seed_local_manifold(ju, Branch::stable, rad, 16), NumericalError);
    CHECK_THROWS_AS(seed_local_manifold(js, Branch::stable, LD(0.5), 16), ConfigError);
    auto bad = seed_local_manifold(ju, Branch::unstable, rad, 12);
    CHECK_THROWS_AS(globalize_to_section(sys, bad, make_section(spec, LD(0), 16), ld_ctx()), ConfigError);
}

TEST_CASE("zero model has no splitting", "[splitting]") {
    auto spec = make_unfolding<LD>(fixtures::zero_model());
    const LD v = 0.2L;
    auto e = measure_splitting(spec, LD(0.01), LD(0), make_section(spec, v, 64), ld_ctx());
    LD m = 0;
    for (const auto& c : e.D_hat) m = std::max(m, std::abs(c));
    CHECK(m < 1e-10L);
    const LD sech = 1 / std::cosh(spec.d * v);
    const LD R0 = (spec.d + 1) / (2 * spec.b) * sech * sech;
    for (std::size_t k = 0; k < e.r_u.size(); ++k) {
        CHECK(std::abs(e.r_u[k] - R0) < 1e-10L);
        CHECK(std::abs(e.r_s[k] - R0) < 1e-10L);
    }
}

TEST_CASE("conservative splitting is real and dominated by the first harmonic", "[splitting]") {
    const auto& e = cons_entry(0.14L);
    CHECK(e.reality < 1e-14L);
    CHECK(std::abs(e.mode(0)) <= 0.05L * e.amp1);
    CHECK(e.amp1 > 100 * e.error_bar);
    CHECK(std::abs(e.mode(2)) < 0.1L * std::abs(e.mode(1)));
    CHECK(e.bits == 64u);
}

TEST_CASE("manifold curves approach the unperturbed heteroclinic as delta shrinks", "[splitting]") {
    std::vector<LD> dev;
    for (LD delta : {0.2L, 0.14L, 0.1L}) {
        const auto& e = cons_entry(delta);
        LD m = 0;
        for (auto r : e.r_u) m = std::max(m, std::abs(r - 1));
        dev.push_back(m);
    }
    CHECK(dev[1] < dev[0]);
    CHECK(dev[2] < dev[1]);
    // at least first order in delta
    CHECK(std::log(dev[0] / dev[2]) / std::log(LD(2)) >= 1);
}

TEST_CASE("seed phase does not move the crossing curve", "[splitting]") {
    const auto& e0 = cons_entry(0.14L);
    SplittingOptions<LD> so;
    so.phase0 = 0.3L;
    auto e1 = measure_splitting(conservative(), LD(0.14L * 0.14L), LD(0), make_section(conservative(), LD(0), 64),
                                ld_ctx(), so);
    CHECK(std::abs(e1.mode(1) - e0.mode(1)) < 1e-8L * e0.amp1);
    CHECK(std::abs(e1.mode(0) - e0.mode(0)) < 1e-8L * e0.amp1);
}

TEST_CASE("theta shift covariance of the first harmonic", "[splitting]") {
    const auto& e = cons_entry(0.14L);
    const LD th0 = 0.7L;
    TrigInterpolant<LD> Di(e.D);
    const int n = e.n_sec;
    std::vector<cplx<LD>> shifted(n), modes;
    for (int k = 0; k < n; ++k) shifted[k] = Di.eval(e.theta[k] + th0);
    FFTPlan<LD> plan(n);
    plan.grid_to_modes(shifted, e.half(), modes);
    const auto m1 = modes[static_cast<std::size_t>(1 + e.half())];
    CHECK(std::abs(m1 - e.mode(1) * std::polar(LD(1), th0)) < 1e-12L * e.amp1);
    CHECK(std::abs(2 * std::abs(m1) - e.amp1) < 1e-12L * e.amp1);
}

TEST_CASE("seed radius and section resolution refinement", "[splitting]") {
    const LD delta = 0.11L;
    const auto& e0 = cons_entry(delta);
    SplittingOptions<LD> half;
    half.seed_radius = 0.5e-3L;
    auto er = measure_splitting(conservative(), delta * delta, LD(0), make_section(conservative(), LD(0), 64),
                                ld_ctx(), half);
    CHECK(std::abs(er.amp1 - e0.amp1) < 1e-8L * e0.amp1);
    const auto& en = cons_entry(delta, 0, 128);
    CHECK(std::abs(en.amp1 - e0.amp1) < 1e-8L * e0.amp1);
    CHECK(std::abs(en.phase1 - e0.phase1) < 1e-8L);
}

TEST_CASE("section position changes the amplitude by the cosh power", "[splitting]") {
    const LD delta = 0.09L, v = 0.3L;
    const auto& e0 = cons_entry(delta);
    const auto& e3 = cons_entry(delta, v);
    const LD d = conservative().d;
    const LD ratio = e3.amp1_bar / e0.amp1_bar;
    const LD target = std::pow(std::cosh(d * v), 1 + 2 / d);
    CHECK(std::abs(ratio / target - 1) < 0.05L);
}

TEST_CASE("nu0 for a conservative model is zero", "[splitting]") {
    auto r = find_nu0(conservative(), LD(0.04), make_section(conservative(), LD(0), 32), ld_ctx());
    CHECK(r.conservative);
    CHECK(r.nu0 == 0);
    CHECK(r.evaluations == 1);
}

TEST_CASE("nu0 for a dissipative model", "[splitting]") {
    const auto& sp = dissipative();
    std::vector<LD> ratios;
    Nu0Result<LD> first;
    for (LD delta : {0.2L, 0.14L, 0.1L}) {
        auto r = find_nu0(sp, delta * delta, make_section(sp, LD(0), 64), ld_ctx());
        CHECK_FALSE(r.conservative);
        CHECK(std::abs(r.entry.upsilon0_hat) <= 1e-2L * r.entry.amp1);
        ratios.push_back(r.ratio);
        if (ratios.size() == 1) first = r;
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(std::abs(*hi - *lo) <= 0.2L * std::abs(*lo));

    auto fine = find_nu0(sp, first.mu, make_section(sp, LD(0), 128), ld_ctx());
    CHECK(std::abs(fine.nu0 - first.nu0) <= 1e-10L * first.mu);

    Nu0Options<LD> narrow;
    narrow.bracket = 1e-3L;
    CHECK_THROWS_AS(find_nu0(sp, LD(0.04), make_section(sp, LD(0), 32), ld_ctx(), {}, narrow), NumericalError);
}

TEST_CASE("matching error vanishes for the zero model", "[splitting][matching]") {
    auto spec = make_unfolding<LD>(fixtures::zero_model());
    InnerNonlinearity<LD> nl(spec);
    MatchingOptions<LD> o;
    o.n_points = 3;
    o.n_seeds = 4;
    const LD delta = 0.09L;
    auto sol = matching_inner(nl, o, o.K * std::pow(delta, o.gamma - 1));
    auto e = matching_error(spec, delta, sol, ld_ctx(), o);
    REQUIRE(!e.samples.empty());
    CHECK(e.sup_weighted < 1e-10L);
    for (const auto& s : e.samples) CHECK(std::abs(s.psi_inner) < 1e-12L);
}

TEST_CASE("conservative matching error is small at the inner edge", "[splitting][matching]") {
    InnerNonlinearity<LD> nl(conservative());
    MatchingOptions<LD> o;
    o.n_points = 4;
    o.n_seeds = 8;
    const LD delta = 0.09L;
    auto sol = matching_inner(nl, o, o.K * std::pow(delta, o.gamma - 1));
    auto e = matching_error(conservative(), delta, sol, ld_ctx(), o);
    CHECK(e.Y_lo >= o.Y_min);
    CHECK(e.Y_hi > e.Y_lo);
    CHECK(e.samples.size() >= 2 * static_cast<std::size_t>(o.n_seeds));
    CHECK(e.edge_ratio <= 0.1L);
    for (const auto& s : e.samples) CHECK(std::abs(s.psi_outer) > 0);

    MatchingOptions<LD> bad = o;
    bad.gamma = 1.5L;
    CHECK_THROWS_AS(matching_error(conservative(), delta, sol, ld_ctx(), bad), ConfigError);
}

TEST_CASE("splitting agrees across precisions", "[splitting][slow]") {
    PrecisionScope p(192);
    using R = mp_real;
    auto spec = make_unfolding<R>(fixtures::conservative_model());
    auto ctx = PrecisionCtx::for_bits(192);
    auto hi = measure_splitting(spec, R("0.04"), R(0), make_section(spec, R(0), 32), ctx);
    auto lo = measure_splitting(conservative(), LD(0.04), LD(0), make_section(conservative(), LD(0), 32), ld_ctx());
    CHECK(hi.bits == 192u);
    CHECK(hi.reality < R("1e-40"));
    const LD a_hi = static_cast<LD>(hi.amp1);
    CHECK(std::abs(a_hi - lo.amp1) < 1e-8L * lo.amp1);
    CHECK(std::abs(static_cast<LD>(hi.phase1) - lo.phase1) < 1e-8L);
}
