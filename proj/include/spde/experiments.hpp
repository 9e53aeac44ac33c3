#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "spde/field.hpp"
#include "spde/integrator.hpp"
#include "spde/model.hpp"
#include "spde/noise.hpp"

namespace spde {

/// Test functionals phi(u) evaluated on the discrete state; all depend on u only through
/// the L2 norm, so they are cheap and globally bounded (except the norm powers).
enum class Functional {
    cos_norm_sq,             ///< cos(||u||^2)
    exp_neg_norm_sq,         ///< exp(-||u||^2)
    sin_norm,                ///< sin(||u||)
    norm_4,                  ///< ||u||^4
    sin_norm_sq,             ///< sin(||u||^2)
    sqrt2_cos_norm_sq_shift, ///< sqrt(2) cos(||u||^2 - pi/4)
    norm_sq                  ///< ||u||^2
};

double evaluate_functional(Functional phi, const SpectralField& u);
std::string_view functional_name(Functional phi);
std::optional<Functional> functional_from_name(std::string_view name);

/// The profile c sin(pi x / L) as a spectral field: coefficient c sqrt(L/2) on mode 1.
SpectralField sine_initial(Domain domain, int n_modes, double amplitude);

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long long n = 0;
};

enum class RowFlag { ok, zero_error, noise_floor };

struct RateRow {
    double h = 0.0;     ///< discretization parameter (dt, or lambda_N for spatial curves)
    double err = 0.0;
    double se = 0.0;
    long long n = 0;
    RowFlag flag = RowFlag::ok;
};

struct RateTable {
    std::vector<RateRow> rows;  ///< sorted by strictly decreasing h
    std::optional<double> slope;
    std::optional<double> slope_se;

    int n_excluded() const;
};

/// Least-squares slope of log err against log h.  Rows with err == 0 are flagged and
/// skipped, as are rows already flagged by the caller; the fit is only performed when at
/// least three rows survive.  Duplicate h values are rejected.
RateTable fit_rate(std::vector<RateRow> rows);

/// Settings shared by every Monte Carlo experiment.
struct ExperimentBase {
    Domain domain{};
    CubicNonlinearity model{1.0, 0.0, 5.0, 0.0};
    NoiseSpec noise = NoiseSpec::power_law(0.0, 64);
    SolverKind solver = SolverKind::newton;
    double tol = 1e-10;
    int max_iter = 50;
    double damping = 0.5;
    long long n_samples = 2000;
    std::uint64_t seed = 0;
    int workers = 1;
};

/// Temporal refinement study: all step sizes in dt_list are integer multiples of dt_ref,
/// and every trajectory couples the coarse runs to the dt_ref reference through the same
/// Wiener increments (coarsened by summation), so the errors are measured pathwise.
struct TemporalCurveParams {
    explicit TemporalCurveParams(SpectralField x0_) : x0(std::move(x0_)) {}

    ExperimentBase base{};
    int n_modes = 64;
    double t_final = 1.0;
    std::vector<double> dt_list{};
    double dt_ref = 0.0;
    SpectralField x0;
};

struct WeakCurveResult {
    std::vector<Functional> functionals;
    std::vector<RateTable> tables;  ///< one table per functional
    SolveStats stats;
    long long n_failed = 0;
};

struct StrongCurveResult {
    RateTable table;
    SolveStats stats;
    long long n_failed = 0;
};

/// Weak error |E phi(X^{dt}_T) - E phi(X^{ref}_T)| per step size, for each functional,
/// from one common-random-number sweep over n_samples trajectories.
WeakCurveResult weak_error_curve(const TemporalCurveParams& params,
                                 const std::vector<Functional>& phis);

/// Strong error (E ||X^{dt}_T - X^{ref}_T||^2)^{1/2} per step size, same coupling.
StrongCurveResult strong_error_curve(const TemporalCurveParams& params);

/// Spatial refinement study at fixed dt: Galerkin levels n_list against a reference
/// level n_ref on the same driving noise; rows are keyed by h = lambda_N, so the fitted
/// slope is negative (err ~ lambda_N^{-gamma}).
struct SpatialCurveParams {
    explicit SpatialCurveParams(SpectralField x0_) : x0(std::move(x0_)) {}

    ExperimentBase base{};
    std::vector<int> n_list{};
    int n_ref = 128;
    double dt = 0.015625;
    double t_final = 1.0;
    SpectralField x0;
};

WeakCurveResult spatial_weak_error_curve(const SpatialCurveParams& params,
                                         const std::vector<Functional>& phis);

/// Ensemble averages E phi(X_t) along the chain, recorded every `stride` steps, for a
/// family of initial conditions.  Trajectory i uses the same increments for every
/// initial condition (synchronous coupling), which is what makes small differences
/// between the ensembles meaningful.
struct ErgodicityParams {
    ExperimentBase base{};
    int n_modes = 64;
    double dt = 0.015625;
    double t_final = 5.0;
    int stride = 0;  ///< 0: pick automatically (about 64 output times)
    std::vector<SpectralField> inits{};
    std::vector<Functional> phis{};
};

struct ErgodicitySeries {
    std::vector<double> times;
    /// estimates[init][phi][time index]
    std::vector<std::vector<std::vector<MCEstimate>>> estimates;
    SolveStats stats;
    long long n_failed = 0;
};

ErgodicitySeries ergodicity_run(const ErgodicityParams& params);

} // namespace spde
