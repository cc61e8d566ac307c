// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any criterion fails.

#include "fixtures.hpp"
#include "sslab/app/cli.hpp"
#include "sslab/asymptotics/law.hpp"
#include "sslab/inner/verify.hpp"
#include "sslab/model/critical_points.hpp"
#include "sslab/model/heteroclinic.hpp"
#include "sslab/splitting/matching.hpp"
#include "sslab/splitting/measure.hpp"
#include "sslab/stokes/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace sslab;
using LD = long double;
using CL = cplx<LD>;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(LD x, int digits = 3) { return to_sci(x, digits); }

const PrecisionCtx& ld_ctx() {
    static const PrecisionCtx c = PrecisionCtx::for_bits(64);
    return c;
}

const UnfoldingSpec<LD>& conservative() {
    static const auto s = make_unfolding<LD>(fixtures::conservative_model());
    return s;
}

const StokesRun<LD>& stokes_run(LD angle) {
    static std::map<LD, StokesRun<LD>> cache;
    auto it = cache.find(angle);
    if (it != cache.end()) return it->second;
    InnerNonlinearity<LD> nl(conservative());
    StokesConfig<LD> sc;
    sc.angle = angle;
    return cache.emplace(angle, run_stokes(nl, sc)).first->second;
}

// 1. L(G(phi)) = phi over the battery and annihilation of the kernel, 192 bits
Outcome operator_identities() {
    PrecisionScope scope{192};
    using R = mp_real;
    R worst_battery = 0, worst_kernel = 0, literal = 0;
    int cases = 0;
    for (R d : {R(1), R(3) / 2}) {
        auto res = right_inverse_battery<R>(R(1), d, R(8), 8);
        worst_battery = std::max(worst_battery, res.worst);
        cases += res.cases;
        for (int l = -3; l <= 3; ++l) {
            worst_kernel = std::max(worst_kernel, kernel_residual<R>(R(1), d, l, +1, cplx<R>(-3, -8), cplx<R>(4, -9)));
            literal = std::max(literal, kernel_residual<R>(R(1), d, l, -1, cplx<R>(-3, -8), cplx<R>(4, -9)));
        }
    }
    const bool pass = cases == 10 && worst_battery <= R(1e-10) && worst_kernel <= R(1e-25);
    return {pass, "right inverse " + sci(static_cast<LD>(worst_battery)) + " over " + std::to_string(cases) +
                      " decay cases (tol 1e-10), kernel e^{+il alpha s/d} " + sci(static_cast<LD>(worst_kernel)) +
                      " (tol 1e-25); e^{-il alpha s/d} form " + sci(static_cast<LD>(literal)) + " (not in the kernel)"};
}

// 2. heteroclinic residual, Gamma identity and unperturbed equilibria, 192 bits
Outcome closed_form_dynamics() {
    PrecisionScope scope{192};
    using R = mp_real;
    using C = cplx<R>;
    auto cfg = fixtures::dissipative_model();
    cfg.monomials.clear();
    cfg.gamma3 = cfg.gamma4 = cfg.gamma5 = "0";
    auto spec = make_unfolding<R>(cfg);
    const R delta("0.1");
    auto sys = scale_system(spec, delta * delta, R(0));
    const R h("1e-20");
    R residual = 0, gamma = 0;
    for (int k = 0; k <= 40; ++k) {
        const C t(R(-5) + R(k) / 4);
        const C th(R("0.2"));
        auto p0 = heteroclinic<R>(t, th, spec, delta);
        auto pp = heteroclinic<R>(t + C(h), th, spec, delta);
        auto pm = heteroclinic<R>(t - C(h), th, spec, delta);
        auto v = sys.polar<C>({p0.r, p0.theta, p0.z});
        residual = std::max<R>({residual, abs((pp.r - pm.r) / (2 * h) - v[0]), abs((pp.theta - pm.theta) / (2 * h) - v[1]),
                                abs((pp.z - pm.z) / (2 * h) - v[2])});
        gamma = std::max<R>(gamma, abs(C(-1) + R(2) * spec.b * p0.r / (spec.d + 1) + p0.z * p0.z));
    }
    PrecisionCtx ctx(192, 1e-45, 1e-45);
    auto zero = make_unfolding<R>(fixtures::zero_model());
    auto cps = critical_points(scale_system(zero, R("0.01"), R(0)), ctx);
    R eq = 0;
    for (int i = 0; i < 3; ++i) {
        eq = std::max<R>(eq, abs(cps.first.z[i] - (i == 2 ? R(-1) : R(0))));
        eq = std::max<R>(eq, abs(cps.second.z[i] - (i == 2 ? R(1) : R(0))));
    }
    const R eps = ldexp(R(1), -190);
    const bool pass = residual <= R(1e-25) && gamma <= 16 * eps && eq == 0;
    return {pass, "heteroclinic residual " + sci(static_cast<LD>(residual)) + " on 41 points (tol 1e-25), Gamma " +
                      sci(static_cast<LD>(gamma)) + ", equilibria offset " + sci(static_cast<LD>(eq))};
}

// 3. zero perturbation: every quantity of the chain vanishes
Outcome zero_chain() {
    auto spec = make_unfolding<LD>(fixtures::zero_model());
    InnerNonlinearity<LD> nl(spec);
    auto sol = solve_inner(nl, InnerDomainSpec<LD>{}, InnerOptions<LD>{});
    const LD psi = sol.psi().weighted_sup(0);
    StokesConfig<LD> sc;
    sc.far_factor = 20;
    auto run = run_stokes(nl, sc);
    LD dpsi = 0, ups = 0, cstar = 0;
    for (std::size_t i = 0; i < run.diff.delta_psi.size(); ++i) dpsi = std::max(dpsi, run.diff.delta_psi.norm_at(i));
    for (const auto& w : run.windows) {
        for (const auto& [l, u] : w.upsilon) ups = std::max(ups, std::abs(u.value));
        cstar = std::max(cstar, w.c_star_abs);
    }
    const LD L0 = std::abs(run.L0.a0);
    LD D = 0;
    for (LD delta : {0.2L, 0.1L}) {
        auto e = measure_splitting(spec, delta * delta, LD(0), make_section(spec, LD(0), 32), ld_ctx());
        for (const auto& x : e.D) D = std::max(D, std::abs(x));
        D = std::max(D, std::max(e.amp1, std::abs(e.upsilon0_hat)) - 10 * e.error_bar);
    }
    // D comes from trajectory shooting, so it vanishes only to the integration tolerance
    const LD tol = ld_ctx().abs_tol();
    const bool pass = psi == 0 && sol.corrections.front() == 0 && dpsi == 0 && L0 == 0 && ups == 0 && cstar == 0 &&
                      D <= tol;
    return {pass, "psi_in " + sci(psi) + " (first iterate " + sci(sol.corrections.front()) + "), Delta psi " +
                      sci(dpsi) + ", L0 " + sci(L0) + ", Upsilon " + sci(ups) + ", |C*| " + sci(cstar) + ", max |D| " +
                      sci(D) + " (integration tol " + sci(tol) + ")"};
}

// 4. decay exponents of the conservative sample (d = 1) over |s| in [2 rho_in, 20 rho_in]
Outcome decay_exponents() {
    InnerNonlinearity<LD> nl(conservative());
    InnerDomainSpec<LD> dom;
    auto sol = solve_inner(nl, dom, InnerOptions<LD>{});
    auto rep = decay_report(sol, 2 * dom.rho_in, 20 * dom.rho_in);
    const bool pass = rep.psi.slope >= -3.2L && rep.psi.slope <= -2.8L && rep.remainder.slope <= -3.7L;
    return {pass, "psi slope " + sci(rep.psi.slope, 4) + " (window [-3.2, -2.8]), remainder slope " +
                      sci(rep.remainder.slope, 4) + " (<= -3.7)"};
}

// 5. contraction above the bisected threshold, reproducible to one step
Outcome contraction() {
    InnerNonlinearity<LD> nl(conservative());
    InnerOptions<LD> o;
    InnerDomainSpec<LD> dom;
    const LD step = 0.25L;
    const LD r1 = rho_contract(nl, dom, o, 1.0L, 16.0L, step);
    const LD r2 = rho_contract(nl, dom, o, 1.0L, 16.0L, step);
    LD worst = 0;
    for (LD rho : {r1, r1 + 1, 2 * r1, 8.0L}) {
        dom.rho_in = rho;
        auto oo = o;
        oo.max_iter = 6;
        oo.require_contraction = false;
        auto sol = solve_inner(nl, dom, oo);
        for (const auto& r : sol.ratios) worst = std::max(worst, r);
    }
    const bool pass = std::abs(r1 - r2) <= step && worst < 0.5L;
    return {pass, "threshold rho_in " + sci(r1, 4) + " and " + sci(r2, 4) + " (step " + sci(step, 2) +
                      "), max correction ratio for rho_in in {thr, thr+1, 2 thr, 8}: " + sci(worst)};
}

// 6. Upsilon^[-1] across extraction depths and ray angles
Outcome stokes_stability() {
    const auto& a = stokes_run(0);
    const auto& b = stokes_run(pi<LD>() / 12);
    const CL ref = a.windows.front().upsilon.at(-1).value;
    LD spread = 0, proj = 0;
    for (const auto* run : {&a, &b})
        for (const auto& w : run->windows) {
            const CL u = w.upsilon.at(-1).value;
            spread = std::max(spread, std::abs(u - ref) / std::abs(ref));
            proj = std::max(proj, w.positive_projection / std::abs(u));
        }
    const bool pass = std::abs(ref) > 0 && spread <= 0.01L && proj <= 1e-3L;
    return {pass, "|Upsilon^[-1]| " + sci(std::abs(ref), 6) + ", max relative spread over windows {2, 4} rho_in and "
                  "angles {0, 15 deg} " + sci(spread) + " (tol 1e-2), l >= 0 projections / |Upsilon^[-1]| " +
                      sci(proj) + " (tol 1e-3)"};
}

// conservative sweep shared by 7, 8, 9
struct Sweep {
    std::vector<SplittingEntry<LD>> entries;
};

const Sweep& sweep() {
    static const Sweep s = [] {
        Sweep s;
        for (LD delta : {0.20L, 0.14L, 0.11L, 0.09L})
            s.entries.push_back(measure_splitting(conservative(), delta * delta, LD(0),
                                                  make_section(conservative(), LD(0), 64), ld_ctx()));
        return s;
    }();
    return s;
}

Outcome conservative_average() {
    LD worst = 0;
    std::string per;
    for (const auto& e : sweep().entries)
        if (e.delta <= 0.15L) {
            const LD r = std::abs(e.mode(0)) / e.amp1;
            worst = std::max(worst, r);
            per += (per.empty() ? "" : ", ") + sci(r);
        }
    return {worst <= 0.05L, "|D0|/amp1 at delta 0.14, 0.11, 0.09: " + per + " (tol 0.05)"};
}

Outcome exponential_law() {
    auto law = make_law(conservative(), stokes_run(0).data());
    std::vector<LawSample<LD>> pts;
    bool above = true;
    for (const auto& e : sweep().entries) {
        pts.push_back({e.delta, e.v, e.amp1_bar, e.error_bar * e.amp1_bar / e.amp1, e.phase1});
        above = above && e.amp1 > 10 * e.error_bar;
    }
    auto rep = fit_exponential_law(pts, law);
    const bool pass = above && rep.rate_rel_error <= 0.10L && rep.power_rel_error <= 0.20L;
    return {pass, "rate " + sci(rep.rate_hat, 4) + " vs pi/2 (rel " + sci(rep.rate_rel_error) + ", tol 0.10), power " +
                      sci(rep.power_hat, 4) + " vs 3 (rel " + sci(rep.power_rel_error) + ", tol 0.20)" +
                      (above ? "" : ", amp1 not above 10 error bars")};
}

Outcome amplitude_band() {
    const LD cabs = stokes_run(0).data().c_star_abs;
    std::vector<LD> trend;
    std::string rs;
    LD A = 0;
    for (const auto& e : sweep().entries) {
        const LD alpha = conservative().alpha_of(e.delta, LD(0));
        const LD r = scaled_amplitude_ratio(e.amp1, e.delta, e.v, alpha, conservative().d, cabs);
        const LD t = std::abs(r - 1) * std::log(1 / e.delta);
        trend.push_back(t);
        A = std::max(A, t);
        rs += (rs.empty() ? "" : ", ") + sci(r, 4);
    }
    bool shrink = true;
    for (std::size_t i = trend.size() - 2; i < trend.size(); ++i) shrink = shrink && trend[i] <= trend[i - 1];
    return {A <= 5 && shrink, "ratios " + rs + ", A " + sci(A) + " (max 5), band width non-increasing over the three "
                              "smallest delta: " + (shrink ? "yes" : "no")};
}

// 10. matching error slope in delta, gamma = 1/2
Outcome matching_slope() {
    InnerNonlinearity<LD> nl(conservative());
    MatchingOptions<LD> o;
    const std::vector<LD> deltas{0.12L, 0.09L, 0.07L};
    auto sol = matching_inner(nl, o, o.K * std::pow(deltas.back(), o.gamma - 1));
    std::vector<MatchingEntry<LD>> es;
    for (LD delta : deltas) es.push_back(matching_error(conservative(), delta, sol, ld_ctx(), o));
    auto rep = matching_report(es, o.gamma);
    const LD lo = 0.8L * (1 - o.gamma), hi = 1.2L * (1 - o.gamma);
    std::string sup;
    for (const auto& e : rep.entries) sup += (sup.empty() ? "" : ", ") + sci(e.sup_weighted);
    return {rep.fit.slope >= lo && rep.fit.slope <= hi,
            "slope " + sci(rep.fit.slope, 4) + " (window [" + sci(lo, 2) + ", " + sci(hi, 2) + "]), sup |psi1||s|^2 " +
                sup};
}

// 11. nu0 of the dissipative sample over three mu
Outcome nu0_search() {
    auto spec = make_unfolding<LD>(fixtures::dissipative_model());
    std::vector<LD> ratios;
    LD worst = 0;
    std::string rs;
    for (LD delta : {0.2L, 0.14L, 0.1L}) {
        auto r = find_nu0(spec, delta * delta, make_section(spec, LD(0), 64), ld_ctx());
        ratios.push_back(r.ratio);
        worst = std::max(worst, std::abs(r.entry.upsilon0_hat) / r.entry.amp1);
        rs += (rs.empty() ? "" : ", ") + sci(r.ratio, 5);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const LD spread = std::abs(*hi - *lo) / std::min(std::abs(*lo), std::abs(*hi));
    return {spread <= 0.2L && worst <= 1e-2L, "nu0/mu " + rs + ", spread " + sci(spread) +
                                                  " (tol 0.20), max |upsilon0_hat|/amp1 " + sci(worst) + " (tol 1e-2)"};
}

// 12. two verify runs without the cache write identical files
Outcome determinism() {
    const fs::path cfg = fs::path(SSLAB_SOURCE_DIR) / "configs" / "conservative.yaml";
    const fs::path out = fs::temp_directory_path() / "sslab_acceptance_verify";
    fs::remove_all(out);
    auto verify = [&](std::string& text) {
        std::ostringstream o, e;
        int code = app::run_cli({"verify", "--config", cfg.string(), "--out", out.string(), "--no-cache"}, o, e);
        text = o.str();
        if (code != app::ok && code != app::partial) throw NumericalError("verify failed: " + e.str());
        std::map<std::string, std::string> files;
        for (const auto& f : fs::recursive_directory_iterator(out)) {
            if (!f.is_regular_file()) continue;
            std::ifstream in(f.path(), std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            files[fs::relative(f.path(), out).generic_string()] = ss.str();
        }
        return files;
    };
    std::string t1, t2;
    auto a = verify(t1);
    auto b = verify(t2);
    std::size_t bytes = 0;
    for (const auto& [k, v] : a) bytes += v.size();
    return {a == b && t1 == t2, std::to_string(a.size()) + " files, " + std::to_string(bytes) + " bytes, " +
                                    (a == b ? "identical" : "different") + ", console output " +
                                    (t1 == t2 ? "identical" : "different")};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, operator_identities}, {2, closed_form_dynamics}, {3, zero_chain},          {4, decay_exponents},
        {5, contraction},         {6, stokes_stability},     {7, conservative_average}, {8, exponential_law},
        {9, amplitude_band},      {10, matching_slope},      {11, nu0_search},          {12, determinism},
    };
    int failed = 0;
    for (const auto& [n, f] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = f();
        } catch (const std::exception& e) {
            r = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream t;
        t.precision(1);
        t << std::fixed << secs;
        std::cout << "criterion " << n << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail << " [" << t.str()
                  << " s]" << std::endl;
        failed += r.pass ? 0 : 1;
    }
    std::cout << (12 - failed) << "/12 criteria pass" << std::endl;
    return failed == 0 ? 0 : 1;
}
