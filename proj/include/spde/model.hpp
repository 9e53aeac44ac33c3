#pragma once

#include "spde/field.hpp"
#include "spde/spectral.hpp"

namespace spde {

/// Reaction polynomial f(xi) = -a3 xi^3 + a2 xi^2 + a1 xi + a0 with a3 > 0, so the
/// cubic term is strictly dissipative and f' is bounded above.
struct CubicNonlinearity {
    double a3 = 1.0;
    double a2 = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;

    CubicNonlinearity() = default;

    CubicNonlinearity(double a3_, double a2_, double a1_, double a0_)
        : a3(a3_), a2(a2_), a1(a1_), a0(a0_) {
        if (!std::isfinite(a3) || !std::isfinite(a2) || !std::isfinite(a1) || !std::isfinite(a0))
            throw std::invalid_argument("CubicNonlinearity: coefficients must be finite");
        if (a3 <= 0.0)
            throw std::invalid_argument("CubicNonlinearity: a3 must be > 0 (leading term "
                                        "must be dissipative)");
    }
};

/// Constants of the drift used by step-size control and diagnostics.
struct DriftConstants {
    double lambda_f;         ///< sup of f', the one-sided Lipschitz constant of f
    double growth_estimate;  ///< C with |f'(xi)| <= C (1 + xi^2), from the coefficients
};

double f_pointwise(double xi, const CubicNonlinearity& m);
double f_prime(double xi, const CubicNonlinearity& m);

/// sup_{xi} f'(xi) = a1 + a2^2 / (3 a3), attained at the vertex of the parabola f'.
double lambda_f(const CubicNonlinearity& m);

DriftConstants drift_constants(const CubicNonlinearity& m);

/// Galerkin projection of the composition f(u): returns the field whose coefficients are
/// <f(u), e_k>, k = 1..n_modes(u), computed exactly.  The odd part of f (the cubic and
/// linear terms) is handled by dealiased sine quadrature on a grid of 4 N points; the
/// even part (quadratic and constant terms) is a cosine polynomial whose projection onto
/// the sine basis is evaluated in closed form.
SpectralField nemytskii(const SpectralField& u, const CubicNonlinearity& m);

namespace detail {

/// <cos(m pi x / L), e_k> on (0, L): zero when k + m is even (and in particular when
/// k == m), else 2 k sqrt(2 L) / (pi (k^2 - m^2)).
double cosine_sine_overlap(int m, int k, double length);

} // namespace detail

} // namespace spde
