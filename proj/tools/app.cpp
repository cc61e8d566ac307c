#include "sslab/app/cli.hpp"
#include "sslab/app/config.hpp"
#include "sslab/asymptotics/law.hpp"
#include "sslab/inner/solver.hpp"
#include "sslab/splitting/measure.hpp"
#include "sslab/stokes/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace sslab::app {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using LD = long double;

const char* const kHeader = "# stokes-splitting-lab v1";

struct Session {
    RunConfig cfg;
    bool use_cache = true;
    std::ostream& out;
    std::ostream& err;
};

/// A stage result: numbers as decimal strings plus the rendered output files.
struct Record {
    json data;
    std::map<std::string, std::string> files;
};

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Record cached(Session& s, const std::string& stage, const std::string& key_text, const std::function<Record()>& make) {
    const std::string key = content_hash(stage + "\n" + key_text);
    const fs::path file = s.cfg.output / "cache" / (stage + "-" + key + ".json");
    if (s.use_cache && fs::exists(file)) {
        try {
            auto j = json::parse(read_file(file));
            if (j.at("key") == key && j.at("stage") == stage) {
                Record r;
                r.data = j.at("data");
                r.files = j.at("files").get<std::map<std::string, std::string>>();
                return r;
            }
        } catch (const json::exception&) {
            // unreadable cache entries are recomputed
        }
    }
    Record r = make();
    json j;
    j["key"] = key;
    j["stage"] = stage;
    j["data"] = r.data;
    j["files"] = r.files;
    write_file(file, j.dump(1));
    return r;
}

void emit(const Session& s, const Record& r) {
    for (const auto& [name, text] : r.files) write_file(s.cfg.output / name, text);
}

unsigned stage_bits(const std::string& setting, unsigned auto_bits) {
    auto b = parse_bits(setting);
    return b ? *b : auto_bits;
}

template <class R>
std::string num(const R& x, unsigned bits) {
    return to_sci(x, static_cast<int>(bits_to_digits10(bits)));
}

template <class R>
R rnum(const std::string& text) {
    return parse_real<R>(text);
}

LD ld(const json& j) { return parse_real<LD>(j.get<std::string>()); }

std::string fmt(LD x, int digits = 6) { return to_sci(x, digits); }

std::string echo_comment(const RunConfig& c) {
    std::string out;
    std::stringstream ss(dump_run_config(c));
    for (std::string line; std::getline(ss, line);) out += "# " + line + "\n";
    return out;
}

// ---------------------------------------------------------------- inner

template <class R>
InnerDomainSpec<R> inner_domain(const RunConfig& c) {
    InnerDomainSpec<R> d;
    d.beta0 = rnum<R>(c.inner.beta0);
    d.rho_in = rnum<R>(c.inner.rho_in);
    return d;
}

template <class R>
InnerOptions<R> inner_options(const RunConfig& c) {
    InnerOptions<R> o;
    o.N = c.inner.N;
    o.reach_factor = rnum<R>(c.inner.reach_factor);
    o.tol = c.inner.tol == "auto" ? R(0) : rnum<R>(c.inner.tol);
    o.max_iter = c.inner.max_iter;
    return o;
}

/// Measured correction ratio at rho_in and a contracting rho_in found by bisection.
template <class R>
std::string contraction_diagnosis(const InnerNonlinearity<R>& nl, InnerDomainSpec<R> dom, const InnerOptions<R>& o) {
    auto probe = o;
    probe.require_contraction = false;
    probe.overflow_limit = R(1);
    probe.tol = R(0);
    R worst = 0;
    bool measured = false;
    // fewer iterations until the probe runs without a breakdown
    for (int iters = 6; iters >= 2 && !measured; --iters) {
        probe.max_iter = probe.min_iter = iters;
        try {
            auto sol = solve_inner(nl, dom, probe);
            const R floor = R(1000000) * epsilon_of<R>();
            for (std::size_t k = 0; k < sol.ratios.size(); ++k)
                if (sol.corrections[k + 1] > floor) worst = std::max<R>(worst, sol.ratios[k]);
            measured = true;
        } catch (const NumericalError&) {
        }
    }
    std::string msg = measured ? "measured correction ratio " + to_sci(worst, 3) + " at rho_in = " + to_sci(dom.rho_in, 4)
                               : "iteration breaks down at rho_in = " + to_sci(dom.rho_in, 4);
    R hi = dom.rho_in;
    for (int k = 0; k < 6; ++k) {
        hi *= 2;
        try {
            R sug = rho_contract(nl, dom, o, dom.rho_in, hi, hi / 64);
            return msg + "; suggested rho_in >= " + to_sci(sug, 4) + " (bisection)";
        } catch (const NumericalError&) {
        }
    }
    return msg + "; no contracting rho_in found up to " + to_sci(hi, 4);
}

template <class R>
std::string inner_csv(const InnerSolution<R>& sol, const std::string& key, unsigned bits) {
    std::ostringstream os;
    os << kHeader << "\n# kind: inner-solution\n# branch: " << branch_name(sol.branch) << "\n# key: " << key
       << "\n# bits: " << bits << "\nnode,re_s,im_s,l,re_psi,im_psi\n";
    const auto& psi = sol.psi();
    for (std::size_t i = 0; i < psi.size(); ++i)
        for (int l = -psi.N; l <= psi.N; ++l) {
            const auto& v = psi.at(i, l);
            os << i << "," << num(psi.s(i).real(), bits) << "," << num(psi.s(i).imag(), bits) << "," << l << ","
               << num(v.real(), bits) << "," << num(v.imag(), bits) << "\n";
        }
    return os.str();
}

Record inner_stage(Session& s) {
    const auto& c = s.cfg;
    const unsigned bits = stage_bits(c.precision.inner, 64);
    const std::string key_text = c.model_text + dump_block(c, "inner") + std::to_string(bits);
    const std::string key = content_hash("inner\n" + key_text);
    return cached(s, "inner", key_text, [&] {
        return dispatch_precision(PrecisionCtx::for_bits(bits), [&](auto tag) {
            using R = decltype(tag);
            InnerNonlinearity<R> nl(make_unfolding<R>(c.model));
            auto dom = inner_domain<R>(c);
            dom.validate();
            const auto o = inner_options<R>(c);
            Record rec;
            std::ostringstream rep;
            rep << kHeader << "\n# kind: inner-report\n" << echo_comment(c);
            const R lo = rnum<R>(c.inner.decay_lo) * dom.rho_in, hi = rnum<R>(c.inner.decay_hi) * dom.rho_in;
            for (Branch b : {Branch::unstable, Branch::stable}) {
                dom.branch = b;
                InnerSolution<R> sol;
                try {
                    sol = solve_inner(nl, dom, o);
                } catch (const NumericalError& e) {
                    throw NumericalError(std::string(e.what()) + "\n" + contraction_diagnosis(nl, dom, o));
                }
                const std::string name = branch_name(b);
                json j;
                j["iterations"] = sol.iterations;
                j["residual"] = num(sol.residual, bits);
                j["overflow"] = num(sol.overflow, bits);
                R worst = 0;
                for (const auto& r : sol.ratios) worst = std::max<R>(worst, r);
                j["max_ratio"] = num(worst, bits);
                const R sup = sol.psi().weighted_sup(R(0));
                j["sup_psi"] = num(sup, bits);
                rep << name << ": iterations " << sol.iterations << ", max correction ratio " << to_sci(worst, 4)
                    << ", pde residual " << to_sci(sol.residual, 4) << "\n";
                if (sup == 0) {
                    // the first correction already vanishes
                    rep << name << ": psi_in = 0 identically, one iteration\n";
                    j["zero"] = true;
                } else {
                    auto d = decay_report(sol, lo, hi);
                    rep << name << ": decay slope of |psi| over |s| in [" << to_sci(lo, 4) << ", " << to_sci(hi, 4)
                        << "]: " << to_sci(d.psi.slope, 6) << "\n";
                    rep << name << ": decay slope of |psi - G(M(0,0))|: " << to_sci(d.remainder.slope, 6) << "\n";
                    j["decay_slope"] = num(d.psi.slope, bits);
                    j["remainder_slope"] = num(d.remainder.slope, bits);
                    j["zero"] = false;
                }
                rec.data[name] = j;
                rec.files["inner_" + name + ".csv"] = inner_csv(sol, key, bits);
            }
            rec.files["inner_report.txt"] = rep.str();
            return rec;
        });
    });
}

// ---------------------------------------------------------------- stokes

template <class R>
StokesConfig<R> stokes_config(const RunConfig& c) {
    StokesConfig<R> sc;
    sc.domain = inner_domain<R>(c);
    sc.inner = inner_options<R>(c);
    sc.angle = rnum<R>(c.stokes.angle);
    sc.far_factor = rnum<R>(c.stokes.far_factor);
    sc.bottom_factor = rnum<R>(c.stokes.bottom_factor);
    sc.window_starts.clear();
    for (const auto& w : c.stokes.window_starts) sc.window_starts.push_back(rnum<R>(w));
    sc.window_length = rnum<R>(c.stokes.window_length);
    sc.modes = c.stokes.modes;
    if (c.stokes.L_plus) sc.L_plus = cplx<R>(rnum<R>(c.stokes.L_plus->first), rnum<R>(c.stokes.L_plus->second));
    return sc;
}

Record stokes_stage(Session& s) {
    const auto& c = s.cfg;
    const unsigned bits = stage_bits(c.precision.stokes, 64);
    const std::string key_text = c.model_text + dump_block(c, "stokes") + std::to_string(bits);
    return cached(s, "stokes", key_text, [&] {
        return dispatch_precision(PrecisionCtx::for_bits(bits), [&](auto tag) {
            using R = decltype(tag);
            using C = cplx<R>;
            InnerNonlinearity<R> nl(make_unfolding<R>(c.model));
            const auto sc = stokes_config<R>(c);
            StokesRun<R> run;
            try {
                run = run_stokes(nl, sc);
            } catch (const NumericalError& e) {
                auto dom = sc.domain;
                throw NumericalError(std::string(e.what()) + "\n" + contraction_diagnosis(nl, dom, sc.inner));
            }
            auto cj = [&](const C& z) { return json::array({num(z.real(), bits), num(z.imag(), bits)}); };
            Record rec;
            json& d = rec.data;
            d["bits"] = bits;
            d["a0"] = cj(run.L0.a0);
            d["L0"] = cj(run.L0.L0);
            d["L0_error"] = num(run.L0.error, bits);
            json wins = json::array();
            std::ostringstream csv;
            csv << kHeader << "\n# kind: stokes-upsilon\n" << echo_comment(c) << "window,y_lo,y_hi,l,re,im,error\n";
            for (std::size_t w = 0; w < run.windows.size(); ++w) {
                const auto& sd = run.windows[w];
                json jw;
                jw["y_lo"] = num(sd.y_lo, bits);
                jw["y_hi"] = num(sd.y_hi, bits);
                json ups = json::object();
                for (auto it = sd.upsilon.rbegin(); it != sd.upsilon.rend(); ++it) {
                    ups[std::to_string(it->first)] = {num(it->second.value.real(), bits),
                                                      num(it->second.value.imag(), bits),
                                                      num(it->second.error, bits)};
                    csv << w << "," << num(sd.y_lo, bits) << "," << num(sd.y_hi, bits) << "," << it->first << ","
                        << num(it->second.value.real(), bits) << "," << num(it->second.value.imag(), bits) << ","
                        << num(it->second.error, bits) << "\n";
                }
                jw["upsilon"] = ups;
                jw["positive_projection"] = num(sd.positive_projection, bits);
                jw["dominance"] = num(sd.dominance, bits);
                jw["c_star"] = cj(sd.c_star);
                jw["c_star_abs"] = num(sd.c_star_abs, bits);
                jw["phase_fitted"] = sd.phase_fitted;
                wins.push_back(jw);
            }
            d["windows"] = wins;
            const auto& first = run.windows.front().upsilon.at(-1).value;
            const auto& last = run.windows.back().upsilon.at(-1).value;
            using std::abs;
            const R scale = std::max<R>(abs(first), abs(last));
            const R disagreement = scale > 0 ? abs(first - last) / scale : R(0);
            d["depth_disagreement"] = num(disagreement, bits);
            d["depth_warning"] = disagreement > R(1) / 100;
            const auto& sd = run.data();
            d["c_star"] = cj(sd.c_star);
            d["c_star_abs"] = num(sd.c_star_abs, bits);
            d["phase_fitted"] = sd.phase_fitted;

            std::ostringstream rep;
            rep << kHeader << "\n# kind: stokes-report\n" << echo_comment(c) << stokes_report(sd);
            rep << "depth_disagreement " << to_sci(disagreement, 3)
                << (disagreement > R(1) / 100 ? " WARNING: extraction depths disagree by more than 1%" : "") << "\n";
            rec.files["stokes_report.txt"] = rep.str();
            rec.files["stokes_upsilon.csv"] = csv.str();
            json out;
            out["format"] = "stokes-splitting-lab v1";
            out["config"] = dump_run_config(c);
            out["stokes"] = d;
            rec.files["stokes.json"] = out.dump(2) + "\n";
            return rec;
        });
    });
}

// ---------------------------------------------------------------- split

struct MuOutcome {
    Record rec;
    bool ok = false;
};

template <class R>
json entry_json(const SplittingEntry<R>& e, unsigned bits) {
    json j;
    j["v"] = num(e.v, bits);
    j["nu"] = num(e.nu, bits);
    j["amp1"] = num(e.amp1, bits);
    j["phase1"] = num(e.phase1, bits);
    j["amp1_bar"] = num(e.amp1_bar, bits);
    j["D0"] = num(e.mode(0).real(), bits);
    j["upsilon0_hat"] = num(e.upsilon0_hat, bits);
    j["reality"] = num(e.reality, bits);
    j["fit_error"] = num(e.fit_error, bits);
    j["noise"] = num(e.noise, bits);
    j["error_bar"] = num(e.error_bar, bits);
    json modes = json::array();
    for (int l = 0; l <= std::min(4, e.half()); ++l)
        modes.push_back({l, num(e.mode(l).real(), bits), num(e.mode(l).imag(), bits)});
    j["modes"] = modes;
    return j;
}

template <class R>
std::string grid_rows(const SplittingEntry<R>& e, unsigned bits) {
    std::ostringstream os;
    for (std::size_t k = 0; k < e.theta.size(); ++k)
        os << num(e.v, bits) << "," << k << "," << num(e.theta[k], bits) << "," << num(e.r_u[k], bits) << ","
           << num(e.r_s[k], bits) << "," << num(e.D[k], bits) << "\n";
    return os.str();
}

MuOutcome split_mu(Session& s, std::size_t index) {
    const auto& c = s.cfg;
    const std::string& mu_text = c.splitting.mu[index];
    const double delta = std::sqrt(static_cast<double>(parse_real<LD>(mu_text)));
    const unsigned bits = stage_bits(c.precision.split, policy_bits(delta));
    char name[32];
    std::snprintf(name, sizeof name, "split_mu%02zu.csv", index);
    const std::string key_text = c.model_text + dump_block(c, "split") + std::to_string(bits) + "\nmu " + mu_text;
    MuOutcome res;
    try {
        res.rec = cached(s, "split", key_text, [&] {
            return dispatch_precision(PrecisionCtx::for_bits(bits), [&](auto tag) {
                using R = decltype(tag);
                const auto ctx = PrecisionCtx::for_bits(bits);
                auto spec = make_unfolding<R>(c.model);
                using std::sqrt;
                const R mu = rnum<R>(mu_text);
                SplittingOptions<R> so;
                so.seed_radius = rnum<R>(c.splitting.seed_radius);
                so.glob.t_max = rnum<R>(c.splitting.t_max);
                so.glob.jobs = c.jobs;
                Record rec;
                json& d = rec.data;
                d["mu"] = mu_text;
                d["delta"] = num(sqrt(mu), bits);
                d["bits"] = bits;
                d["status"] = "ok";
                std::ostringstream csv;
                csv << kHeader << "\n# kind: splitting-grid\n# mu: " << mu_text << "\n# bits: " << bits << "\n";
                R nu = c.splitting.nu_mode == "fixed" ? rnum<R>(c.splitting.nu) : R(0);
                json entries = json::array();
                std::string rows;
                for (std::size_t iv = 0; iv < c.splitting.v.size(); ++iv) {
                    const auto section = make_section(spec, rnum<R>(c.splitting.v[iv]), c.splitting.n_sec);
                    SplittingEntry<R> e;
                    if (c.splitting.nu_mode == "nu0-search" && iv == 0) {
                        Nu0Options<R> no;
                        no.bracket = rnum<R>(c.splitting.nu0_bracket);
                        no.rel_tol = rnum<R>(c.splitting.nu0_rel_tol);
                        auto r = find_nu0(spec, mu, section, ctx, so, no);
                        nu = r.nu0;
                        d["nu0"] = num(r.nu0, bits);
                        d["nu0_ratio"] = num(r.ratio, bits);
                        d["nu0_evaluations"] = r.evaluations;
                        e = r.entry;
                    } else {
                        e = measure_splitting(spec, mu, nu, section, ctx, so);
                    }
                    entries.push_back(entry_json(e, bits));
                    rows += grid_rows(e, bits);
                }
                d["nu"] = num(nu, bits);
                d["entries"] = entries;
                csv << "# nu: " << num(nu, bits) << "\nv,k,theta,r_u,r_s,D\n" << rows;
                rec.files[name] = csv.str();
                return rec;
            });
        });
        res.ok = true;
    } catch (const NumericalError& e) {
        // FoldDetected and escapes abort this mu only
        res.rec.data = json{{"mu", mu_text}, {"bits", bits}, {"status", "failed"}, {"error", e.what()}};
        res.rec.files[name] = std::string(kHeader) + "\n# kind: splitting-grid\n# mu: " + mu_text +
                              "\n# status: failed: " + e.what() + "\n";
    }
    return res;
}

struct SplitResult {
    std::vector<json> mus;
    int failed = 0;
};

SplitResult split_stage(Session& s) {
    const auto& c = s.cfg;
    if (c.splitting.mu.empty()) throw ConfigError("'splitting.mu' is empty");
    SplitResult sr;
    Record summary;
    std::ostringstream modes;
    modes << kHeader << "\n# kind: splitting-modes\nmu,v,l,re,im\n";
    for (std::size_t i = 0; i < c.splitting.mu.size(); ++i) {
        auto m = split_mu(s, i);
        emit(s, m.rec);
        if (!m.ok) ++sr.failed;
        const auto& d = m.rec.data;
        s.out << "split mu=" << c.splitting.mu[i] << ": " << d.at("status").get<std::string>();
        if (m.ok) {
            s.out << " amp1=" << fmt(ld(d.at("entries")[0].at("amp1")));
            if (d.contains("nu0")) s.out << " nu0/mu=" << fmt(ld(d.at("nu0_ratio")));
            for (const auto& e : d.at("entries"))
                for (const auto& md : e.at("modes"))
                    modes << d.at("mu").get<std::string>() << "," << e.at("v").get<std::string>() << ","
                          << md[0].get<int>() << "," << md[1].get<std::string>() << "," << md[2].get<std::string>()
                          << "\n";
        } else {
            s.out << " (" << d.at("error").get<std::string>() << ")";
        }
        s.out << "\n";
        json brief = d;
        sr.mus.push_back(brief);
    }
    json out;
    out["format"] = "stokes-splitting-lab v1";
    out["config"] = dump_run_config(c);
    out["mu"] = sr.mus;
    if (c.splitting.nu_mode == "nu0-search") {
        // nu0 ordered by decreasing mu
        std::vector<LD> nu0;
        for (const auto& m : sr.mus)
            if (m.contains("nu0")) nu0.push_back(ld(m.at("nu0")));
        bool inc = true, dec = true;
        for (std::size_t i = 1; i < nu0.size(); ++i) {
            inc = inc && nu0[i] >= nu0[i - 1];
            dec = dec && nu0[i] <= nu0[i - 1];
        }
        out["nu0_monotone"] = nu0.size() >= 2 && (inc || dec);
        s.out << "nu0 trend over mu: " << (nu0.size() >= 2 && (inc || dec) ? "monotone" : "not monotone") << "\n";
    }
    summary.files["split_summary.json"] = out.dump(2) + "\n";
    summary.files["split_modes.csv"] = modes.str();
    emit(s, summary);
    return sr;
}

// ---------------------------------------------------------------- verify

struct Line {
    std::string text;
    bool pass;
};

std::string line_text(const Line& l) { return l.text + ": " + (l.pass ? "PASS" : "FAIL"); }

std::vector<std::string> verify_report(const RunConfig& c, const json& stokes, const SplitResult& sr, json& out) {
    auto spec = make_unfolding<LD>(c.model);
    const auto& a = c.asymptotics;
    std::vector<LawSample<LD>> pts;
    struct Pt {
        LD delta, nu, amp1, amp1_bar, err, D0, ups0, phase, v;
        bool has_nu0;
        LD nu0_ratio;
    };
    std::vector<Pt> P;
    for (const auto& m : sr.mus) {
        if (m.at("status") != "ok") continue;
        const auto& e = m.at("entries")[0];
        Pt p{ld(m.at("delta")), ld(m.at("nu")), ld(e.at("amp1")), ld(e.at("amp1_bar")), ld(e.at("error_bar")),
             ld(e.at("D0")), ld(e.at("upsilon0_hat")), ld(e.at("phase1")), ld(e.at("v")), m.contains("nu0"),
             m.contains("nu0_ratio") ? ld(m.at("nu0_ratio")) : LD(0)};
        P.push_back(p);
    }
    if (P.size() < 4) throw NumericalError("verify: fewer than 4 mu values succeeded");
    std::vector<Line> lines;
    std::vector<std::string> notes;
    const LD cabs = ld(stokes.at("c_star_abs"));
    LD max_amp = 0, max_err = 0;
    for (const auto& p : P) {
        max_amp = std::max(max_amp, p.amp1);
        max_err = std::max(max_err, p.err);
    }
    out["c_star_abs"] = stokes.at("c_star_abs");
    if (cabs == 0) {
        const bool consistent = max_amp <= std::max<LD>(10 * max_err, 1e-10L);
        notes.push_back(std::string("degenerate: C*=0 ") + (consistent ? "consistent" : "inconsistent") +
                        " (max amp1 " + fmt(max_amp, 3) + ")");
        lines.push_back({"criterion 3 zero perturbation: C* = 0 and D = 0 (amp1 <= max(10 error bar, 1e-10))",
                         consistent});
        out["degenerate"] = true;
    } else {
        out["degenerate"] = false;
        PredictedLaw<LD> law;
        law.alpha0 = spec.alpha0;
        law.alpha3 = spec.alpha3;
        law.d = spec.d;
        law.b = spec.b;
        law.L0 = ld(stokes.at("L0")[0]);
        law.c_star = cplx<LD>(ld(stokes.at("c_star")[0]), ld(stokes.at("c_star")[1]));
        law.phase_fitted = stokes.at("phase_fitted").get<bool>();
        law.which = spec.conservative ? LawCase::conservative : LawCase::dissipative;
        bool above = true;
        for (const auto& p : P) {
            above = above && p.amp1 > 10 * p.err;
            pts.push_back({p.delta, p.v, p.amp1_bar, p.err * p.amp1_bar / p.amp1, p.phase});
        }
        lines.push_back({"precondition: amp1 > 10 x error bar at every mu", above});
        FitReport<LD> rep = fit_exponential_law(pts, law, FitOptions<LD>{a.weighted});
        const LD rate_tol = parse_real<LD>(a.rate_tol), power_tol = parse_real<LD>(a.power_tol);
        lines.push_back({"criterion 8 rate: rho_hat " + fmt(rep.rate_hat) + " vs " + fmt(rep.rate_target) +
                             ", rel err " + fmt(rep.rate_rel_error, 3) + " (tol " + a.rate_tol + ")",
                         rep.rate_rel_error <= rate_tol});
        lines.push_back({"criterion 8 power: p_hat " + fmt(rep.power_hat) + " vs " + fmt(rep.power_target) +
                             ", rel err " + fmt(rep.power_rel_error, 3) + " (tol " + a.power_tol + ")",
                         rep.power_rel_error <= power_tol});
        // amplitude ratio in scaled variables
        std::vector<LD> ratio, trend;
        LD A = 0;
        for (const auto& p : P) {
            const LD alpha = spec.alpha_of(p.delta, p.nu / p.delta);
            const LD r = scaled_amplitude_ratio(p.amp1, p.delta, p.v, alpha, spec.d, cabs);
            const LD t = std::abs(r - 1) * std::log(1 / p.delta);
            ratio.push_back(r);
            trend.push_back(t);
            A = std::max(A, t);
        }
        bool shrink = true;
        for (std::size_t i = trend.size() - 2; i < trend.size(); ++i) shrink = shrink && trend[i] <= trend[i - 1];
        const LD A_max = parse_real<LD>(a.band_A_max);
        std::string rs;
        for (auto r : ratio) rs += (rs.empty() ? "" : " ") + fmt(r, 4);
        lines.push_back({"criterion 9 amplitude band: ratios [" + rs + "], A " + fmt(A, 3) + " (max " + a.band_A_max +
                             "), |ratio-1| log(1/delta) non-increasing over the three smallest delta: " +
                             (shrink ? "yes" : "no"),
                         A <= A_max && shrink});
        json f;
        f["rate_hat"] = to_sci(rep.rate_hat, 12);
        f["power_hat"] = to_sci(rep.power_hat, 12);
        f["intercept"] = to_sci(rep.intercept, 12);
        f["rate_target"] = to_sci(rep.rate_target, 12);
        f["power_target"] = to_sci(rep.power_target, 12);
        f["rate_rel_error"] = to_sci(rep.rate_rel_error, 6);
        f["power_rel_error"] = to_sci(rep.power_rel_error, 6);
        f["phase_hat"] = to_sci(rep.phase_hat, 12);
        json res = json::array(), pr = json::array(), po = json::array(), sr_ = json::array(), tr = json::array();
        for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
            res.push_back(to_sci(rep.residuals[i], 6));
            pr.push_back(to_sci(rep.ratio[i], 6));
            po.push_back(to_sci(rep.phase_offset[i], 6));
        }
        for (std::size_t i = 0; i < ratio.size(); ++i) {
            sr_.push_back(to_sci(ratio[i], 6));
            tr.push_back(to_sci(trend[i], 6));
        }
        f["residuals"] = res;
        f["amplitude_ratio_original"] = pr;
        f["phase_offset"] = po;
        f["amplitude_ratio_scaled"] = sr_;
        f["remainder_trend"] = tr;
        f["band_A"] = to_sci(A, 6);
        out["fit"] = f;
        if (law.phase_fitted) notes.push_back("arg C* fitted from the phase offsets: " + fmt(rep.phase_hat));
    }
    // conservative average
    const LD avg_tol = parse_real<LD>(a.average_tol), dmax = parse_real<LD>(a.average_delta_max);
    if (spec.conservative && cabs != 0) {
        LD worst = 0;
        int n = 0;
        for (const auto& p : P)
            if (p.delta <= dmax) {
                worst = std::max(worst, std::abs(p.D0) / p.amp1);
                ++n;
            }
        if (n > 0)
            lines.push_back({"criterion 7 conservative average: max |D0|/amp1 " + fmt(worst, 3) + " over delta <= " +
                                 a.average_delta_max + " (tol " + a.average_tol + ")",
                             worst <= avg_tol});
    }
    if (c.splitting.nu_mode == "nu0-search") {
        std::vector<LD> r;
        LD worst = 0;
        for (const auto& p : P)
            if (p.has_nu0) {
                r.push_back(p.nu0_ratio);
                worst = std::max(worst, std::abs(p.ups0) / p.amp1);
            }
        if (r.size() >= 3) {
            const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
            const LD spread = std::abs(*hi - *lo) / std::min(std::abs(*lo), std::abs(*hi));
            lines.push_back({"criterion 11 nu0: nu0/mu spread " + fmt(spread, 3) + " (tol " + a.nu0_spread +
                                 "), max |upsilon0_hat|/amp1 " + fmt(worst, 3) + " (tol " + a.nu0_residual + ")",
                             spread <= parse_real<LD>(a.nu0_spread) && worst <= parse_real<LD>(a.nu0_residual)});
        }
    }
    std::vector<std::string> text = notes;
    json jl = json::array();
    for (const auto& l : lines) {
        text.push_back(line_text(l));
        jl.push_back({{"line", l.text}, {"pass", l.pass}});
    }
    out["lines"] = jl;
    out["notes"] = notes;
    return text;
}

// ---------------------------------------------------------------- commands

int cmd_inner(Session& s) {
    auto rec = inner_stage(s);
    emit(s, rec);
    for (const char* b : {"unstable", "stable"}) {
        const auto& j = rec.data.at(b);
        s.out << "inner " << b << ": iterations " << j.at("iterations").get<int>() << ", max ratio "
              << fmt(ld(j.at("max_ratio")), 3);
        if (j.at("zero").get<bool>())
            s.out << ", psi_in = 0 identically (one iteration)";
        else
            s.out << ", decay slope " << fmt(ld(j.at("decay_slope")), 4);
        s.out << "\n";
    }
    return ok;
}

int cmd_stokes(Session& s) {
    auto rec = stokes_stage(s);
    emit(s, rec);
    const auto& d = rec.data;
    s.out << "stokes: |C*| = " << fmt(ld(d.at("c_star_abs")), 8) << ", L0 = " << fmt(ld(d.at("L0")[0]), 8)
          << ", depth disagreement " << fmt(ld(d.at("depth_disagreement")), 3);
    if (d.at("depth_warning").get<bool>()) s.out << " WARNING";
    s.out << "\n";
    return ok;
}

int cmd_split(Session& s) {
    auto sr = split_stage(s);
    if (sr.failed == static_cast<int>(sr.mus.size())) {
        s.err << "error: splitting failed for every mu\n";
        return numerical_error;
    }
    return sr.failed > 0 ? partial : ok;
}

int cmd_verify(Session& s) {
    if (s.cfg.splitting.mu.size() < 4) throw ConfigError("verify needs at least 4 values in 'splitting.mu'");
    auto st = stokes_stage(s);
    emit(s, st);
    auto sr = split_stage(s);
    if (sr.failed == static_cast<int>(sr.mus.size())) {
        s.err << "error: splitting failed for every mu\n";
        return numerical_error;
    }
    json out;
    out["format"] = "stokes-splitting-lab v1";
    out["config"] = dump_run_config(s.cfg);
    auto lines = verify_report(s.cfg, st.data, sr, out);
    std::string txt = std::string(kHeader) + "\n# kind: verify\n" + echo_comment(s.cfg);
    for (const auto& l : lines) {
        txt += l + "\n";
        s.out << l << "\n";
    }
    write_file(s.cfg.output / "verify.txt", txt);
    write_file(s.cfg.output / "verify.json", out.dump(2) + "\n");
    return sr.failed > 0 ? partial : ok;
}

int cmd_report(Session& s) {
    const auto dir = s.cfg.output;
    bool any = false;
    for (const char* name : {"inner_report.txt", "stokes_report.txt", "verify.txt"}) {
        const auto p = dir / name;
        if (!fs::exists(p)) continue;
        any = true;
        s.out << "== " << name << "\n";
        std::stringstream ss(read_file(p));
        for (std::string line; std::getline(ss, line);)
            if (line.rfind("# ", 0) != 0) s.out << line << "\n";
    }
    const auto sp = dir / "split_summary.json";
    if (fs::exists(sp)) {
        any = true;
        auto j = json::parse(read_file(sp));
        s.out << "== split_summary.json\nmu,status,bits,nu,amp1,amp1_bar,D0,error_bar\n";
        for (const auto& m : j.at("mu")) {
            s.out << m.at("mu").get<std::string>() << "," << m.at("status").get<std::string>() << ","
                  << m.at("bits").get<unsigned>();
            if (m.at("status") == "ok") {
                const auto& e = m.at("entries")[0];
                s.out << "," << fmt(ld(m.at("nu"))) << "," << fmt(ld(e.at("amp1"))) << "," << fmt(ld(e.at("amp1_bar")))
                      << "," << fmt(ld(e.at("D0"))) << "," << fmt(ld(e.at("error_bar")), 3);
            }
            s.out << "\n";
        }
    }
    if (!any) throw ConfigError("nothing to report in " + dir.string());
    return ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"stokes-splitting-lab", "sslab"};
    app.require_subcommand(1, 1);
    std::string config, precision, outdir;
    int jobs = 0;
    bool no_cache = false, defaults = false;
    std::vector<std::string> sets;
    std::map<std::string, CLI::App*> subs;
    const std::vector<std::pair<std::string, std::string>> names{
        {"inner", "solve the inner equation for both branches"},
        {"stokes", "extract the Stokes constant"},
        {"split", "measure the splitting over the mu list"},
        {"verify", "fit the exponential law and print PASS/FAIL per criterion"},
        {"report", "summarize the outputs in the output directory"}};
    for (const auto& [name, desc] : names) {
        auto* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config, "run config (YAML)");
        sub->add_option("--precision", precision, "mantissa bits or 'auto' for every stage");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", outdir, "output directory");
        sub->add_option("--set", sets, "override key=value (dotted keys)");
        sub->add_flag("--no-cache", no_cache, "ignore cached stage results");
        if (name == "report") sub->add_flag("--defaults", defaults, "print the default run config");
        subs[name] = sub;
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    }
    std::string cmd;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) cmd = name;

    try {
        if (cmd == "report" && defaults) {
            RunConfig d;
            d.model_path = "<model.yaml>";
            out << dump_block(d, "all") << "\n";
            return ok;
        }
        std::vector<std::string> overrides = sets;
        if (!precision.empty()) overrides.push_back("precision=" + precision);
        if (jobs > 0) overrides.push_back("jobs=" + std::to_string(jobs));
        if (!outdir.empty()) overrides.push_back("output=" + outdir);
        if (config.empty()) {
            if (cmd == "report" && !outdir.empty()) {
                Session s{RunConfig{}, true, out, err};
                s.cfg.output = outdir;
                return cmd_report(s);
            }
            throw ConfigError("--config is required");
        }
        Session s{load_run_config(config, overrides), !no_cache, out, err};
        if (cmd == "inner") return cmd_inner(s);
        if (cmd == "stokes") return cmd_stokes(s);
        if (cmd == "split") return cmd_split(s);
        if (cmd == "verify") return cmd_verify(s);
        return cmd_report(s);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const YAML::Exception& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    }
}

}  // namespace sslab::app
