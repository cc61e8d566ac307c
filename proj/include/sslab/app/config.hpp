#ifndef SSLAB_APP_CONFIG_HPP
#define SSLAB_APP_CONFIG_HPP

#include "sslab/model/unfolding.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sslab::app {

/// Numbers are kept as decimal text until they are instantiated at the working precision.
struct InnerBlock {
    std::string beta0 = "0.25", rho_in = "8";
    int N = 16;
    std::string reach_factor = "400";
    std::string tol = "auto";  // auto: 1e5 eps of the working type
    int max_iter = 80;
    std::string decay_lo = "2", decay_hi = "20";  // decay fit over |s| in [lo, hi] rho_in
};

struct StokesBlock {
    std::string angle = "0";
    std::string far_factor = "400", bottom_factor = "6";
    std::vector<std::string> window_starts{"2", "4"};
    std::string window_length = "2";
    int modes = 2;
    std::optional<std::pair<std::string, std::string>> L_plus;  // unset: phase fitted
};

struct SplittingBlock {
    std::vector<std::string> mu;
    std::string nu_mode = "conservative";  // conservative | nu0-search | fixed
    std::string nu = "0";                  // used by nu_mode fixed
    std::vector<std::string> v{"0"};
    int n_sec = 64;
    std::string seed_radius = "1e-3";
    std::string t_max = "400";
    std::string nu0_bracket = "1", nu0_rel_tol = "1e-10";
};

struct AsymptoticsBlock {
    bool weighted = false;
    std::string rate_tol = "0.10", power_tol = "0.20", band_A_max = "5";
    std::string average_tol = "0.05", average_delta_max = "0.15";
    std::string nu0_spread = "0.20", nu0_residual = "1e-2";
};

struct PrecisionBlock {
    std::string inner = "64", stokes = "64", split = "auto";  // auto: policy bits per delta for split
};

struct RunConfig {
    std::filesystem::path source;  // run config file, for relative paths
    std::filesystem::path model_path;
    ModelConfig model;
    std::string model_text;  // canonical model dump (hash input)
    std::filesystem::path output = "out";
    int jobs = 1;
    PrecisionBlock precision;
    InnerBlock inner;
    StokesBlock stokes;
    SplittingBlock splitting;
    AsymptoticsBlock asymptotics;
};

ModelConfig load_model(const std::filesystem::path& path);
std::string dump_model(const ModelConfig& m);

/// Reads a run config, applies key=value overrides (dotted keys, YAML values) and validates.
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// Fully resolved config as YAML, defaults materialized, fixed key order.
std::string dump_run_config(const RunConfig& c);

/// Section of the resolved config that determines a stage's result.
std::string dump_block(const RunConfig& c, const std::string& stage);

/// FNV-1a, hex.
std::string content_hash(const std::string& text);

/// "auto" or a bit count >= 64.
std::optional<unsigned> parse_bits(const std::string& text);

}  // namespace sslab::app

#endif
