#ifndef SSLAB_STOKES_PIPELINE_HPP
#define SSLAB_STOKES_PIPELINE_HPP

#include "sslab/stokes/extraction.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace sslab {

template <class R>
struct StokesConfig {
    InnerDomainSpec<R> domain;
    InnerOptions<R> inner;
    CorrectionOptions<R> corrections;
    R angle = R(0);          // ray tilt from the downward vertical, radians
    R bottom_factor = R(6);  // uniform panels down to |Im s| = bottom_factor * rho_in
    R far_factor = R(400);   // the ray continues with growing panels to far_factor * rho_in
    std::vector<R> window_starts{R(2), R(4)};  // extraction windows start at these multiples of rho_in
    R window_length = R(2);                    // ... and extend over this multiple of rho_in
    int gauss_points = 8;
    int modes = 2;
    int samples = 4;
    std::optional<cplx<R>> L_plus;
};

template <class R>
struct StokesRun {
    InnerSolution<R> unstable, stable;
    DifferenceField<R> diff;
    L0Estimate<R> L0;
    PhaseAmplitudeCorrections<R> corrections;
    std::vector<StokesData<R>> windows;

    const StokesData<R>& data() const { return windows.back(); }
};

/// Ray from -i rho_in descending at `angle` from the vertical to depth far_factor * rho_in.
template <class R>
std::pair<cplx<R>, cplx<R>> stokes_ray(const StokesConfig<R>& cfg) {
    using std::cos;
    using std::sin;
    const R rho = cfg.domain.rho_in;
    const cplx<R> top(0, -rho);
    const R t = (cfg.far_factor - 1) * rho / cos(cfg.angle);
    return {top, top + t * cplx<R>(sin(cfg.angle), -cos(cfg.angle))};
}

/// Both inner solutions on a common ray in E_in, the coefficients, L0, the corrections and
/// Upsilon_in on each extraction window, with C* assembled from the deepest window.
template <class R>
StokesRun<R> run_stokes(const InnerNonlinearity<R>& nl, const StokesConfig<R>& cfg) {
    cfg.domain.validate();
    const R rho = cfg.domain.rho_in;
    if (!(cfg.bottom_factor > 1) || !(cfg.far_factor >= cfg.bottom_factor))
        throw ConfigError("stokes ray must extend below -i rho_in and far_factor >= bottom_factor");
    for (const auto& w : cfg.window_starts)
        if (!(w >= 1) || w + cfg.window_length > cfg.bottom_factor + R(1) / R(1000))
            throw ConfigError("stokes extraction window outside the ray");
    auto [top, bottom] = stokes_ray(cfg);
    if (!in_E_in(bottom, cfg.domain.beta0, rho)) throw ConfigError("stokes ray leaves E_in");
    StokesRun<R> run;
    auto dom = cfg.domain;
    dom.branch = Branch::unstable;
    using std::cos;
    const R uniform = (cfg.bottom_factor - 1) * rho / cos(cfg.angle);
    run.unstable = solve_inner_ray(nl, dom, top, bottom, cfg.inner, uniform);
    dom.branch = Branch::stable;
    run.stable = solve_inner_ray(nl, dom, top, bottom, cfg.inner, uniform);
    run.diff = difference_and_coefficients(nl, run.unstable, run.stable, cfg.gauss_points);
    run.L0 = compute_L0(run.diff, 2 * rho, cfg.far_factor * rho);
    set_a2_bar(run.diff, run.L0.L0);
    run.corrections = solve_corrections(run.diff, run.L0.L0, cfg.corrections);
    const auto& sp = nl.spec();
    for (const auto& w : cfg.window_starts) {
        auto sd = extract_upsilon(run.diff, run.corrections, run.L0, w * rho, (w + cfg.window_length) * rho, cfg.modes,
                                  cfg.samples);
        auto cs = assemble_c_star(sd.upsilon.at(-1).value, sd.L0, cfg.L_plus, sp.alpha0, sp.c(), sp.d);
        sd.L_plus = cfg.L_plus;
        sd.c_star = cs.value;
        sd.c_star_abs = cs.modulus;
        sd.phase_fitted = cs.phase_fitted;
        run.windows.push_back(std::move(sd));
    }
    return run;
}

}  // namespace sslab

#endif
