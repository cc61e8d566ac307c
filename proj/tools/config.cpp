#include "sslab/app/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sslab::app {

namespace fs = std::filesystem;

namespace {

YAML::Node load_yaml_file(const fs::path& path, const char* what) {
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " not found: " + path.string());
    try {
        return YAML::LoadFile(path.string());
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string(what) + " " + path.string() + ": " + e.what());
    }
}

std::string scalar(const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) throw ConfigError("expected a scalar for '" + key + "'");
    return n.Scalar();
}

void read(const YAML::Node& parent, const char* key, const std::string& path, std::string& out) {
    if (auto n = parent[key]) out = scalar(n, path + key);
}

void read(const YAML::Node& parent, const char* key, const std::string& path, int& out) {
    if (auto n = parent[key]) {
        try {
            out = n.as<int>();
        } catch (const YAML::Exception&) {
            throw ConfigError("expected an integer for '" + path + key + "'");
        }
    }
}

void read(const YAML::Node& parent, const char* key, const std::string& path, bool& out) {
    if (auto n = parent[key]) {
        try {
            out = n.as<bool>();
        } catch (const YAML::Exception&) {
            throw ConfigError("expected true/false for '" + path + key + "'");
        }
    }
}

void read(const YAML::Node& parent, const char* key, const std::string& path, std::vector<std::string>& out) {
    auto n = parent[key];
    if (!n) return;
    out.clear();
    if (n.IsScalar()) {
        out.push_back(n.Scalar());
        return;
    }
    if (!n.IsSequence()) throw ConfigError("expected a list for '" + path + key + "'");
    for (const auto& e : n) out.push_back(scalar(e, path + key));
}

void check_known(const YAML::Node& n, const std::vector<std::string>& keys, const std::string& path) {
    if (!n) return;
    if (!n.IsMap()) throw ConfigError("expected a mapping for '" + (path.empty() ? std::string("<root>") : path) + "'");
    for (const auto& kv : n) {
        const auto k = kv.first.Scalar();
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw ConfigError("unknown config key '" + path + (path.empty() ? "" : ".") + k + "'");
    }
}

long double number(const std::string& text, const std::string& key) {
    try {
        return parse_real<long double>(text);
    } catch (const std::exception&) {
        throw ConfigError("'" + key + "' is not a number: '" + text + "'");
    }
}

void require_positive(const std::string& text, const std::string& key) {
    if (!(number(text, key) > 0)) throw ConfigError("'" + key + "' must be positive");
}

/// key=value with a dotted key; the value is parsed as YAML.
void apply_override(YAML::Node& root, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string p; std::getline(ss, p, '.');) {
        if (p.empty()) throw ConfigError("--set: empty component in key '" + key + "'");
        parts.push_back(p);
    }
    YAML::Node parsed;
    try {
        parsed = YAML::Load(value);
    } catch (const YAML::Exception& e) {
        throw ConfigError("--set " + key + ": " + e.what());
    }
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = chain.back()[parts[i]];
        if (!next.IsDefined() || next.IsNull()) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[parts[i]];
        }
        chain.push_back(next);
    }
    chain.back()[parts.back()] = parsed;
}

void emit_list(YAML::Emitter& e, const std::vector<std::string>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (const auto& s : v) e << s;
    e << YAML::EndSeq;
}

}  // namespace

ModelConfig load_model(const fs::path& path) {
    auto root = load_yaml_file(path, "model file");
    check_known(root,
                {"alpha0", "alpha1", "alpha2", "alpha3", "beta1", "gamma2", "gamma3", "gamma4", "gamma5", "h3",
                 "conservative", "max_degree", "monomials"},
                "");
    ModelConfig m;
    read(root, "alpha0", "", m.alpha0);
    read(root, "alpha1", "", m.alpha1);
    read(root, "alpha2", "", m.alpha2);
    read(root, "alpha3", "", m.alpha3);
    read(root, "beta1", "", m.beta1);
    read(root, "gamma2", "", m.gamma2);
    read(root, "gamma3", "", m.gamma3);
    read(root, "gamma4", "", m.gamma4);
    read(root, "gamma5", "", m.gamma5);
    read(root, "h3", "", m.h3);
    read(root, "conservative", "", m.conservative);
    read(root, "max_degree", "", m.max_degree);
    if (auto mons = root["monomials"]) {
        if (!mons.IsSequence()) throw ConfigError("monomials must be a list");
        for (const auto& e : mons) {
            if (!e.IsSequence() || e.size() != 7)
                throw ConfigError("monomial entries are [target, i, j, k, m, n, coefficient]");
            MonomialSpec ms;
            const auto t = scalar(e[0], "monomials");
            if (t.size() != 1 || (t[0] != 'f' && t[0] != 'g' && t[0] != 'h'))
                throw ConfigError("monomial target must be f, g or h, got '" + t + "'");
            ms.target = t[0];
            for (int i = 0; i < 5; ++i) {
                try {
                    ms.exps[i] = e[i + 1].as<int>();
                } catch (const YAML::Exception&) {
                    throw ConfigError("monomial exponents must be integers");
                }
                if (ms.exps[i] < 0) throw ConfigError("monomial exponents must be non-negative");
            }
            ms.coeff = scalar(e[6], "monomials");
            m.monomials.push_back(ms);
        }
    }
    // Parse once so that errors surface at load time.
    (void)make_unfolding<long double>(m);
    return m;
}

std::string dump_model(const ModelConfig& m) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "alpha0" << YAML::Value << m.alpha0;
    e << YAML::Key << "alpha1" << YAML::Value << m.alpha1;
    e << YAML::Key << "alpha2" << YAML::Value << m.alpha2;
    e << YAML::Key << "alpha3" << YAML::Value << m.alpha3;
    e << YAML::Key << "beta1" << YAML::Value << m.beta1;
    e << YAML::Key << "gamma2" << YAML::Value << m.gamma2;
    e << YAML::Key << "gamma3" << YAML::Value << m.gamma3;
    e << YAML::Key << "gamma4" << YAML::Value << m.gamma4;
    e << YAML::Key << "gamma5" << YAML::Value << m.gamma5;
    e << YAML::Key << "h3" << YAML::Value << m.h3;
    e << YAML::Key << "conservative" << YAML::Value << m.conservative;
    e << YAML::Key << "max_degree" << YAML::Value << m.max_degree;
    e << YAML::Key << "monomials" << YAML::Value << YAML::BeginSeq;
    for (const auto& ms : m.monomials) {
        e << YAML::Flow << YAML::BeginSeq << std::string(1, ms.target);
        for (int x : ms.exps) e << x;
        e << ms.coeff << YAML::EndSeq;
    }
    e << YAML::EndSeq << YAML::EndMap;
    return e.c_str();
}

RunConfig load_run_config(const fs::path& path, const std::vector<std::string>& overrides) {
    auto root = load_yaml_file(path, "run config");
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& kv : overrides) apply_override(root, kv);
    check_known(root, {"model", "output", "jobs", "precision", "inner", "stokes", "splitting", "asymptotics"}, "");

    RunConfig c;
    c.source = path;
    std::string model;
    read(root, "model", "", model);
    if (model.empty()) throw ConfigError("run config " + path.string() + " names no model file");
    c.model_path = fs::path(model).is_absolute() ? fs::path(model) : path.parent_path() / model;
    c.model = load_model(c.model_path);
    c.model_text = dump_model(c.model);
    if (auto n = root["output"]) c.output = scalar(n, "output");
    read(root, "jobs", "", c.jobs);
    if (c.jobs < 1) throw ConfigError("'jobs' must be at least 1");

    auto pr = root["precision"];
    if (pr && pr.IsScalar()) {
        c.precision.inner = c.precision.stokes = c.precision.split = pr.Scalar();
    } else {
        check_known(pr, {"inner", "stokes", "split"}, "precision");
        read(pr, "inner", "precision.", c.precision.inner);
        read(pr, "stokes", "precision.", c.precision.stokes);
        read(pr, "split", "precision.", c.precision.split);
    }
    for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
             {"precision.inner", c.precision.inner}, {"precision.stokes", c.precision.stokes},
             {"precision.split", c.precision.split}}) {
        try {
            (void)parse_bits(v);
        } catch (const ConfigError& e) {
            throw ConfigError("'" + k + "': " + e.what());
        }
    }

    auto in = root["inner"];
    check_known(in, {"beta0", "rho_in", "N", "reach_factor", "tol", "max_iter", "decay_lo", "decay_hi"}, "inner");
    read(in, "beta0", "inner.", c.inner.beta0);
    read(in, "rho_in", "inner.", c.inner.rho_in);
    read(in, "N", "inner.", c.inner.N);
    read(in, "reach_factor", "inner.", c.inner.reach_factor);
    read(in, "tol", "inner.", c.inner.tol);
    read(in, "max_iter", "inner.", c.inner.max_iter);
    read(in, "decay_lo", "inner.", c.inner.decay_lo);
    read(in, "decay_hi", "inner.", c.inner.decay_hi);

    auto st = root["stokes"];
    check_known(st, {"angle", "far_factor", "bottom_factor", "window_starts", "window_length", "modes", "L_plus"},
                "stokes");
    read(st, "angle", "stokes.", c.stokes.angle);
    read(st, "far_factor", "stokes.", c.stokes.far_factor);
    read(st, "bottom_factor", "stokes.", c.stokes.bottom_factor);
    read(st, "window_starts", "stokes.", c.stokes.window_starts);
    read(st, "window_length", "stokes.", c.stokes.window_length);
    read(st, "modes", "stokes.", c.stokes.modes);
    if (st && st["L_plus"] && !st["L_plus"].IsNull()) {
        auto lp = st["L_plus"];
        if (lp.IsScalar())
            c.stokes.L_plus = std::make_pair(lp.Scalar(), std::string("0"));
        else if (lp.IsSequence() && lp.size() == 2)
            c.stokes.L_plus = std::make_pair(scalar(lp[0], "stokes.L_plus"), scalar(lp[1], "stokes.L_plus"));
        else
            throw ConfigError("'stokes.L_plus' must be a number or [re, im]");
    }

    auto sp = root["splitting"];
    check_known(sp, {"mu", "nu_mode", "nu", "v", "n_sec", "seed_radius", "t_max", "nu0_bracket", "nu0_rel_tol"},
                "splitting");
    read(sp, "mu", "splitting.", c.splitting.mu);
    read(sp, "nu_mode", "splitting.", c.splitting.nu_mode);
    read(sp, "nu", "splitting.", c.splitting.nu);
    read(sp, "v", "splitting.", c.splitting.v);
    read(sp, "n_sec", "splitting.", c.splitting.n_sec);
    read(sp, "seed_radius", "splitting.", c.splitting.seed_radius);
    read(sp, "t_max", "splitting.", c.splitting.t_max);
    read(sp, "nu0_bracket", "splitting.", c.splitting.nu0_bracket);
    read(sp, "nu0_rel_tol", "splitting.", c.splitting.nu0_rel_tol);

    auto as = root["asymptotics"];
    check_known(as,
                {"weighted", "rate_tol", "power_tol", "band_A_max", "average_tol", "average_delta_max", "nu0_spread",
                 "nu0_residual"},
                "asymptotics");
    read(as, "weighted", "asymptotics.", c.asymptotics.weighted);
    read(as, "rate_tol", "asymptotics.", c.asymptotics.rate_tol);
    read(as, "power_tol", "asymptotics.", c.asymptotics.power_tol);
    read(as, "band_A_max", "asymptotics.", c.asymptotics.band_A_max);
    read(as, "average_tol", "asymptotics.", c.asymptotics.average_tol);
    read(as, "average_delta_max", "asymptotics.", c.asymptotics.average_delta_max);
    read(as, "nu0_spread", "asymptotics.", c.asymptotics.nu0_spread);
    read(as, "nu0_residual", "asymptotics.", c.asymptotics.nu0_residual);

    // validation
    require_positive(c.inner.beta0, "inner.beta0");
    require_positive(c.inner.rho_in, "inner.rho_in");
    require_positive(c.inner.reach_factor, "inner.reach_factor");
    if (c.inner.tol != "auto") require_positive(c.inner.tol, "inner.tol");
    require_positive(c.inner.decay_lo, "inner.decay_lo");
    if (!(number(c.inner.decay_hi, "inner.decay_hi") > number(c.inner.decay_lo, "inner.decay_lo")))
        throw ConfigError("'inner.decay_hi' must exceed 'inner.decay_lo'");
    if (c.inner.N < 1 || c.inner.max_iter < 1) throw ConfigError("'inner.N' and 'inner.max_iter' must be positive");
    (void)number(c.stokes.angle, "stokes.angle");
    require_positive(c.stokes.far_factor, "stokes.far_factor");
    require_positive(c.stokes.bottom_factor, "stokes.bottom_factor");
    require_positive(c.stokes.window_length, "stokes.window_length");
    if (c.stokes.window_starts.empty()) throw ConfigError("'stokes.window_starts' is empty");
    for (const auto& w : c.stokes.window_starts) require_positive(w, "stokes.window_starts");
    if (c.stokes.modes < 1) throw ConfigError("'stokes.modes' must be positive");
    if (c.stokes.L_plus) {
        (void)number(c.stokes.L_plus->first, "stokes.L_plus");
        (void)number(c.stokes.L_plus->second, "stokes.L_plus");
    }
    long double prev = 0;
    for (std::size_t i = 0; i < c.splitting.mu.size(); ++i) {
        const long double mu = number(c.splitting.mu[i], "splitting.mu");
        if (!(mu > 0) || !(mu < 1)) throw ConfigError("'splitting.mu' values must lie in (0, 1)");
        if (i > 0 && !(mu < prev)) throw ConfigError("'splitting.mu' must be sorted in descending order");
        prev = mu;
    }
    const auto& mode = c.splitting.nu_mode;
    if (mode != "conservative" && mode != "nu0-search" && mode != "fixed")
        throw ConfigError("'splitting.nu_mode' must be conservative, nu0-search or fixed");
    if (mode == "conservative" && !c.model.conservative)
        throw ConfigError("'splitting.nu_mode' conservative needs a conservative model");
    (void)number(c.splitting.nu, "splitting.nu");
    if (c.splitting.v.empty()) throw ConfigError("'splitting.v' is empty");
    for (const auto& v : c.splitting.v) (void)number(v, "splitting.v");
    if (c.splitting.n_sec < 32 || (c.splitting.n_sec & (c.splitting.n_sec - 1)) != 0)
        throw ConfigError("'splitting.n_sec' must be a power of two >= 32");
    require_positive(c.splitting.seed_radius, "splitting.seed_radius");
    require_positive(c.splitting.t_max, "splitting.t_max");
    require_positive(c.splitting.nu0_bracket, "splitting.nu0_bracket");
    require_positive(c.splitting.nu0_rel_tol, "splitting.nu0_rel_tol");
    for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
             {"asymptotics.rate_tol", c.asymptotics.rate_tol},
             {"asymptotics.power_tol", c.asymptotics.power_tol},
             {"asymptotics.band_A_max", c.asymptotics.band_A_max},
             {"asymptotics.average_tol", c.asymptotics.average_tol},
             {"asymptotics.average_delta_max", c.asymptotics.average_delta_max},
             {"asymptotics.nu0_spread", c.asymptotics.nu0_spread},
             {"asymptotics.nu0_residual", c.asymptotics.nu0_residual}})
        require_positive(v, k);
    return c;
}

std::string dump_block(const RunConfig& c, const std::string& stage) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    if (stage == "precision" || stage == "all") {
        e << YAML::Key << "precision" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "inner" << YAML::Value << c.precision.inner;
        e << YAML::Key << "stokes" << YAML::Value << c.precision.stokes;
        e << YAML::Key << "split" << YAML::Value << c.precision.split;
        e << YAML::EndMap;
    }
    if (stage == "inner" || stage == "stokes" || stage == "all") {
        const auto& b = c.inner;
        e << YAML::Key << "inner" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "beta0" << YAML::Value << b.beta0;
        e << YAML::Key << "rho_in" << YAML::Value << b.rho_in;
        e << YAML::Key << "N" << YAML::Value << b.N;
        e << YAML::Key << "reach_factor" << YAML::Value << b.reach_factor;
        e << YAML::Key << "tol" << YAML::Value << b.tol;
        e << YAML::Key << "max_iter" << YAML::Value << b.max_iter;
        e << YAML::Key << "decay_lo" << YAML::Value << b.decay_lo;
        e << YAML::Key << "decay_hi" << YAML::Value << b.decay_hi;
        e << YAML::EndMap;
    }
    if (stage == "stokes" || stage == "all") {
        const auto& b = c.stokes;
        e << YAML::Key << "stokes" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "angle" << YAML::Value << b.angle;
        e << YAML::Key << "far_factor" << YAML::Value << b.far_factor;
        e << YAML::Key << "bottom_factor" << YAML::Value << b.bottom_factor;
        e << YAML::Key << "window_starts" << YAML::Value;
        emit_list(e, b.window_starts);
        e << YAML::Key << "window_length" << YAML::Value << b.window_length;
        e << YAML::Key << "modes" << YAML::Value << b.modes;
        e << YAML::Key << "L_plus" << YAML::Value;
        if (b.L_plus)
            emit_list(e, {b.L_plus->first, b.L_plus->second});
        else
            e << YAML::Null;
        e << YAML::EndMap;
    }
    if (stage == "split" || stage == "all") {
        const auto& b = c.splitting;
        e << YAML::Key << "splitting" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "mu" << YAML::Value;
        emit_list(e, b.mu);
        e << YAML::Key << "nu_mode" << YAML::Value << b.nu_mode;
        e << YAML::Key << "nu" << YAML::Value << b.nu;
        e << YAML::Key << "v" << YAML::Value;
        emit_list(e, b.v);
        e << YAML::Key << "n_sec" << YAML::Value << b.n_sec;
        e << YAML::Key << "seed_radius" << YAML::Value << b.seed_radius;
        e << YAML::Key << "t_max" << YAML::Value << b.t_max;
        e << YAML::Key << "nu0_bracket" << YAML::Value << b.nu0_bracket;
        e << YAML::Key << "nu0_rel_tol" << YAML::Value << b.nu0_rel_tol;
        e << YAML::EndMap;
    }
    if (stage == "all") {
        const auto& b = c.asymptotics;
        e << YAML::Key << "asymptotics" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "weighted" << YAML::Value << b.weighted;
        e << YAML::Key << "rate_tol" << YAML::Value << b.rate_tol;
        e << YAML::Key << "power_tol" << YAML::Value << b.power_tol;
        e << YAML::Key << "band_A_max" << YAML::Value << b.band_A_max;
        e << YAML::Key << "average_tol" << YAML::Value << b.average_tol;
        e << YAML::Key << "average_delta_max" << YAML::Value << b.average_delta_max;
        e << YAML::Key << "nu0_spread" << YAML::Value << b.nu0_spread;
        e << YAML::Key << "nu0_residual" << YAML::Value << b.nu0_residual;
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
    return e.c_str();
}

std::string dump_run_config(const RunConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "model" << YAML::Value << c.model_path.generic_string();
    e << YAML::Key << "output" << YAML::Value << c.output.generic_string();
    e << YAML::Key << "jobs" << YAML::Value << c.jobs;
    e << YAML::EndMap;
    std::string out = e.c_str();
    out += "\n";
    out += dump_block(c, "all");
    out += "\nmodel_resolved:\n";
    std::stringstream ms(c.model_text);
    for (std::string line; std::getline(ms, line);) out += "  " + line + "\n";
    return out;
}

std::string content_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::optional<unsigned> parse_bits(const std::string& text) {
    if (text == "auto") return std::nullopt;
    std::size_t pos = 0;
    unsigned long b = 0;
    try {
        b = std::stoul(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != text.size() || pos == 0) throw ConfigError("precision must be 'auto' or a bit count, got '" + text + "'");
    if (b < 64) throw ConfigError("precision must be at least 64 bits");
    return static_cast<unsigned>(b);
}

}  // namespace sslab::app
