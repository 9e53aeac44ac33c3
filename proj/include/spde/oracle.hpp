#pragma once

#include <vector>

#include "spde/field.hpp"
#include "spde/model.hpp"
#include "spde/noise.hpp"

namespace spde {

/// Closed-form references used only by tests and the oracle-check command.  Everything in
/// here is independent of the production solver path: moments come from scalar OU
/// recursions, and the brute-force projection works in coefficient space with analytic
/// integrals instead of transforms and quadrature.
namespace oracle {

/// Linear drift f(xi) = a1 xi, the setting in which the SPDE decouples into independent
/// scalar OU modes with exact Gaussian laws.
struct LinearModel {
    double a1 = 0.0;
};

/// Per-mode mean and variance of a Gaussian law on span{e_1..e_N}.
struct GaussianModeState {
    std::vector<double> mean;
    std::vector<double> var;

    int n_modes() const { return static_cast<int>(mean.size()); }
};

/// Exact law of the continuous-time solution at time t from a Gaussian initial law:
/// mode j is an OU process with rate lambda_j - a1 and variance inflow q_j.
/// t may be infinity, in which case all active rates must be positive and the
/// stationary law is returned.
GaussianModeState continuous_moments(const GaussianModeState& init, double t,
                                     const LinearModel& m, const NoiseSpec& noise,
                                     const Domain& domain);

/// Exact law of the implicit Euler chain after `steps` steps:
///   mean_{k+1} = mean_k / (1 + rho_j),  var_{k+1} = (var_k + q_j dt) / (1 + rho_j)^2,
/// with rho_j = (lambda_j - a1) dt; requires 1 + rho_j > 0 for every mode.
GaussianModeState discrete_moments(const GaussianModeState& init, int steps, double dt,
                                   const LinearModel& m, const NoiseSpec& noise,
                                   const Domain& domain);

/// Fixed point of the discrete variance recursion: q dt / ((1 + rho)^2 - 1) per mode;
/// requires rho_j > 0 for every mode.
GaussianModeState discrete_stationary(const LinearModel& m, const NoiseSpec& noise,
                                      const Domain& domain, double dt, int n_modes);

enum class GaussianFunctional { norm_sq, exp_neg_norm_sq, norm_4 };

/// E[phi(X)] for X Gaussian with independent modes:
///   norm_sq:          sum_j (m_j^2 + v_j)
///   exp_neg_norm_sq:  prod_j (1 + 2 v_j)^{-1/2} exp(-m_j^2 / (1 + 2 v_j))
///   norm_4:           (sum_j (m_j^2 + v_j))^2 + sum_j (4 m_j^2 v_j + 2 v_j^2)
double gaussian_functional(const GaussianModeState& state, GaussianFunctional phi);

/// Galerkin projection of f(u) computed entirely in coefficient space from the analytic
/// integrals of products of sines and cosines.  O(N^3) triple loop; restricted to
/// n_modes <= 32.  This is the independent cross-check for the transform-based
/// projection in the production path.
SpectralField brute_force_galerkin_cubic(const SpectralField& u, const CubicNonlinearity& m);

} // namespace oracle
} // namespace spde
