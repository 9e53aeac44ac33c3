#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spde/experiments.hpp"

namespace spde {

/// Flat description of a CLI run.  Values are layered in a fixed order: built-in
/// defaults, config file, SPDE_* environment variables, --set overrides, then direct
/// flags; later layers win.  Keys are "section.name" (e.g. "model.a1", "scheme.dt").
struct RunConfig {
    // [domain]
    double length = 1.0;
    // [model]  f(xi) = -a3 xi^3 + a2 xi^2 + a1 xi + a0
    double a3 = 1.0;
    double a2 = 0.0;
    double a1 = 5.0;
    double a0 = 0.0;
    // [noise]
    std::string noise_kind = "power_law";
    double kappa = 0.0;
    int m_w = 0;  ///< driven modes; 0 follows the finest Galerkin level of the run
    std::vector<double> q_list{};
    // [scheme]
    int n_modes = 64;
    double dt = 0.015625;  // 2^-6
    double t_final = 1.0;
    std::string solver = "newton";
    double tol = 1e-10;
    int max_iter = 50;
    double damping = 0.5;
    // [experiment]
    std::vector<double> dt_list{0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};
    double dt_ref = 0.00048828125;  // 2^-11
    std::vector<int> n_list{4, 8, 16, 32};
    int n_ref = 128;
    std::vector<std::string> functionals{"cos_norm_sq", "exp_neg_norm_sq", "sin_norm",
                                         "norm_4"};
    std::vector<std::string> erg_functionals{"sin_norm_sq", "sqrt2_cos_norm_sq_shift",
                                             "exp_neg_norm_sq"};
    std::vector<double> init_scales{-2.0, -1.0, 0.0, 1.0, 2.0};
    double x0_amplitude = 1.0;
    int stride = 0;  ///< ergodicity/simulate output stride; 0 picks one automatically
    // [run]
    long long n_samples = 2000;
    std::uint64_t seed = 0;
    int workers = 0;  ///< 0: hardware concurrency
    std::string out_prefix = "spde_out";
};

/// Parse a number; accepts ordinary literals plus the power notation "2^-6".
double parse_number(const std::string& text);

/// Read an INI-style file ([section] headers, key = value lines, # or ; comments) into
/// ordered (section.key, value) pairs.  Throws on I/O failure or malformed lines.
std::vector<std::pair<std::string, std::string>> read_ini_file(const std::string& path);

/// Collect SPDE_SECTION_KEY environment variables as (section.key, value) pairs.
std::vector<std::pair<std::string, std::string>> env_overrides();

/// Apply key/value overrides to a config.  Unknown keys and unparsable values are
/// reported through `errors` (one entry per problem, nothing is thrown), so a caller can
/// surface every mistake at once.
RunConfig apply_overrides(RunConfig base,
                          const std::vector<std::pair<std::string, std::string>>& overrides,
                          std::vector<std::string>& errors);

/// Cross-field validation (positivity, known names, the step-size constraint
/// dt <= dt0 for every step size the run would use, divisibility of the time grids).
/// Returns one message per violation; empty means the config is runnable.
std::vector<std::string> validate(const RunConfig& cfg);

/// Canonical serialization: one "key=value" line per setting, sorted by key, numbers in
/// round-trip precision.  run.out and run.workers are excluded (they do not affect
/// results).
std::string canonical_text(const RunConfig& cfg);

/// FNV-1a hash of canonical_text, as 16 hex digits; identifies a run's semantics.
std::string config_hash(const RunConfig& cfg);

// Materialization into the experiment layer's types.

CubicNonlinearity make_model(const RunConfig& cfg);
NoiseSpec make_noise(const RunConfig& cfg, int finest_modes);
SolverKind make_solver(const RunConfig& cfg);
std::vector<Functional> make_functionals(const std::vector<std::string>& names);
ExperimentBase make_base(const RunConfig& cfg, int finest_modes);
TemporalCurveParams make_temporal(const RunConfig& cfg);
SpatialCurveParams make_spatial(const RunConfig& cfg);
ErgodicityParams make_ergodicity(const RunConfig& cfg);

} // namespace spde
