#pragma once

#include <Eigen/Dense>

#include "spde/field.hpp"

namespace spde {

/// k-th eigenvalue of the negative Dirichlet Laplacian on (0, length): (k pi / length)^2.
double eigenvalue(int k, double length);

/// Transform plan between the first n_modes sine coefficients and the interior grid with
/// n_grid points.  Synthesis and analysis are mutually inverse as long as n_grid >= n_modes;
/// analysis of products of sine polynomials is exact (no aliasing into the retained modes)
/// when n_grid >= 3 * n_modes + 1, which the dealiased choice n_grid = 4 * n_modes satisfies.
class SineBasis {
public:
    SineBasis(Domain domain, int n_modes, int n_grid, bool with_cosines = false);

    const Domain& domain() const { return domain_; }
    int n_modes() const { return n_modes_; }
    int n_grid() const { return n_grid_; }

    /// Grid values u(x_i) from coefficients (length n_modes -> length n_grid).
    void synthesize(const double* coeffs, double* grid) const;

    /// Coefficients <g, e_k> from grid values by exact sine quadrature
    /// (length n_grid -> length n_modes).
    void analyze(const double* grid, double* coeffs) const;

    /// Cosine-moment sums C_m = sum_i d_i cos(pi i m / P) for m = 0..2*n_modes.
    /// Requires construction with with_cosines = true.
    void cosine_moments(const double* grid, double* moments) const;

    const Eigen::MatrixXd& sine_matrix() const { return sines_; }
    const Eigen::MatrixXd& cosine_matrix() const { return cosines_; }

private:
    Domain domain_;
    int n_modes_;
    int n_grid_;
    Eigen::MatrixXd sines_;    // n_grid x n_modes, entries sqrt(2/L) sin(pi i k / P)
    Eigen::MatrixXd cosines_;  // n_grid x (2 n_modes + 1), entries cos(pi i m / P)
};

/// Evaluate the field on the uniform interior grid with n_grid points (n_grid >= n_modes).
GridField to_grid(const SpectralField& u, int n_grid);

/// Project grid samples onto the first n_modes basis functions by sine quadrature.
SpectralField to_spectral(const GridField& g, int n_modes);

/// Apply the implicit Euler resolvent (I + dt A)^{-1}: mode k is damped by 1/(1 + dt lambda_k).
SpectralField resolvent_apply(const SpectralField& u, double dt);

/// Apply the analytic semigroup e^{-tA}: mode k is damped by exp(-t lambda_k), t >= 0.
SpectralField semigroup_apply(const SpectralField& u, double t);

/// Apply the fractional power A^{r/2}: mode k is scaled by lambda_k^{r/2}.
SpectralField fractional_apply(const SpectralField& u, double r);

/// Maximum absolute value over the evaluation grid; requires n_grid >= 4 * n_modes so the
/// grid resolves the highest retained mode.
double sup_norm(const SpectralField& u, int n_grid);

namespace detail {

/// Unnormalized DST-I of x (length M): X_k = sum_{i=1}^{M} x_i sin(pi i k / (M+1)),
/// k = 1..M.  Requires M + 1 to be a power of two; used as a fast path by the free
/// transform functions.  The transform is proportional to its own inverse:
/// applying it twice multiplies by (M+1)/2.
std::vector<double> dst1_pow2(const std::vector<double>& x);

bool is_pow2(int n);

} // namespace detail

} // namespace spde
