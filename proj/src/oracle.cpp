#include "spde/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spde/spectral.hpp"

namespace spde {
namespace oracle {

namespace {

void require_state(const GaussianModeState& s) {
    if (s.mean.empty() || s.mean.size() != s.var.size())
        throw std::invalid_argument("GaussianModeState: mean and var must be non-empty and "
                                    "of equal length");
    for (double v : s.var)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("GaussianModeState: variances must be >= 0");
    for (double m : s.mean)
        if (!std::isfinite(m))
            throw std::invalid_argument("GaussianModeState: means must be finite");
}

} // namespace

GaussianModeState continuous_moments(const GaussianModeState& init, double t,
                                     const LinearModel& m, const NoiseSpec& noise,
                                     const Domain& domain) {
    require_state(init);
    if (std::isnan(t) || t < 0.0)
        throw std::invalid_argument("continuous_moments: t must be >= 0");

    const int n = init.n_modes();
    GaussianModeState out;
    out.mean.resize(static_cast<std::size_t>(n));
    out.var.resize(static_cast<std::size_t>(n));

    for (int j = 1; j <= n; ++j) {
        const double rho = eigenvalue(j, domain.length) - m.a1;
        const double q = q_coefficient(noise, j);
        if (std::isinf(t)) {
            if (rho <= 0.0)
                throw std::invalid_argument("continuous_moments: stationary law requires "
                                            "lambda_j - a1 > 0 for every mode (violated at "
                                            "j = " + std::to_string(j) + ")");
            out.mean[j - 1] = 0.0;
            out.var[j - 1] = q / (2.0 * rho);
        } else {
            out.mean[j - 1] = std::exp(-rho * t) * init.mean[j - 1];
            // e^{-2 rho t} v0 + q (1 - e^{-2 rho t}) / (2 rho), written with expm1 so the
            // rho -> 0 limit q t comes out without cancellation.
            const double decay = std::exp(-2.0 * rho * t);
            const double inflow = (rho == 0.0) ? q * t : -q * std::expm1(-2.0 * rho * t) / (2.0 * rho);
            out.var[j - 1] = decay * init.var[j - 1] + inflow;
        }
    }
    return out;
}

GaussianModeState discrete_moments(const GaussianModeState& init, int steps, double dt,
                                   const LinearModel& m, const NoiseSpec& noise,
                                   const Domain& domain) {
    require_state(init);
    if (steps < 0)
        throw std::invalid_argument("discrete_moments: steps must be >= 0");
    if (!std::isfinite(dt) || dt <= 0.0)
        throw std::invalid_argument("discrete_moments: dt must be positive and finite");

    const int n = init.n_modes();
    GaussianModeState out = init;
    for (int j = 1; j <= n; ++j) {
        const double rho = (eigenvalue(j, domain.length) - m.a1) * dt;
        if (1.0 + rho <= 0.0)
            throw std::invalid_argument("discrete_moments: 1 + (lambda_j - a1) dt must be "
                                        "positive (violated at j = " + std::to_string(j) + ")");
        const double q = q_coefficient(noise, j);
        const double r = 1.0 / (1.0 + rho);
        double mean = init.mean[j - 1];
        double var = init.var[j - 1];
        for (int k = 0; k < steps; ++k) {
            mean *= r;
            var = (var + q * dt) * r * r;
        }
        out.mean[j - 1] = mean;
        out.var[j - 1] = var;
    }
    return out;
}

GaussianModeState discrete_stationary(const LinearModel& m, const NoiseSpec& noise,
                                      const Domain& domain, double dt, int n_modes) {
    if (n_modes < 1)
        throw std::invalid_argument("discrete_stationary: n_modes must be >= 1");
    if (!std::isfinite(dt) || dt <= 0.0)
        throw std::invalid_argument("discrete_stationary: dt must be positive and finite");

    GaussianModeState out;
    out.mean.assign(static_cast<std::size_t>(n_modes), 0.0);
    out.var.resize(static_cast<std::size_t>(n_modes));
    for (int j = 1; j <= n_modes; ++j) {
        const double rho = (eigenvalue(j, domain.length) - m.a1) * dt;
        if (rho <= 0.0)
            throw std::invalid_argument("discrete_stationary: requires (lambda_j - a1) dt > 0 "
                                        "(violated at j = " + std::to_string(j) + ")");
        // (1 + rho)^2 - 1 = rho (2 + rho), kept factored to avoid cancellation.
        out.var[j - 1] = q_coefficient(noise, j) * dt / (rho * (2.0 + rho));
    }
    return out;
}

double gaussian_functional(const GaussianModeState& state, GaussianFunctional phi) {
    require_state(state);
    const int n = state.n_modes();
    switch (phi) {
        case GaussianFunctional::norm_sq: {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
                s += state.mean[j] * state.mean[j] + state.var[j];
            return s;
        }
        case GaussianFunctional::exp_neg_norm_sq: {
            double p = 1.0;
            for (int j = 0; j < n; ++j) {
                const double d = 1.0 + 2.0 * state.var[j];
                p *= std::exp(-state.mean[j] * state.mean[j] / d) / std::sqrt(d);
            }
            return p;
        }
        case GaussianFunctional::norm_4: {
            double s = 0.0, extra = 0.0;
            for (int j = 0; j < n; ++j) {
                const double m2 = state.mean[j] * state.mean[j];
                s += m2 + state.var[j];
                extra += 4.0 * m2 * state.var[j] + 2.0 * state.var[j] * state.var[j];
            }
            return s * s + extra;
        }
    }
    throw std::logic_error("gaussian_functional: unknown functional");
}

SpectralField brute_force_galerkin_cubic(const SpectralField& u, const CubicNonlinearity& m) {
    const int n = u.n_modes();
    if (n > 32)
        throw std::invalid_argument("brute_force_galerkin_cubic: limited to n_modes <= 32 "
                                    "(O(N^3) reference path)");
    const double len = u.domain().length;
    const auto& a = u.coeffs();
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);

    // Cubic term: expand e_p e_q e_r into +/- sine frequencies; <sin(f pi x/L), e_k>
    // is sqrt(L/2) sgn(f) delta_{|f|,k}, which leaves the prefactor -a3 / (2 L).
    const double cubic = -m.a3 / (2.0 * len);
    const auto add_freq = [&](int f, double sign, double w) {
        if (f == 0) return;
        const int k = std::abs(f);
        if (k <= n) c[static_cast<std::size_t>(k) - 1] += cubic * w * sign * (f > 0 ? 1.0 : -1.0);
    };
    for (int p = 1; p <= n; ++p)
        for (int q = 1; q <= n; ++q)
            for (int r = 1; r <= n; ++r) {
                const double w = a[p - 1] * a[q - 1] * a[r - 1];
                if (w == 0.0) continue;
                add_freq(p - q + r, +1.0, w);
                add_freq(q - p + r, +1.0, w);
                add_freq(p + q + r, -1.0, w);
                add_freq(r - p - q, -1.0, w);
            }

    // Quadratic term: u^2 is a cosine polynomial, e_p e_q = (cos_{|p-q|} - cos_{p+q}) / L;
    // project each plain cosine mode via the closed-form overlap.
    if (m.a2 != 0.0) {
        std::vector<double> ehat(static_cast<std::size_t>(2 * n) + 1, 0.0);
        for (int p = 1; p <= n; ++p)
            for (int q = 1; q <= n; ++q) {
                const double w = m.a2 * a[p - 1] * a[q - 1] / len;
                ehat[static_cast<std::size_t>(std::abs(p - q))] += w;
                ehat[static_cast<std::size_t>(p + q)] -= w;
            }
        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int mm = 0; mm <= 2 * n; ++mm)
                s += ehat[static_cast<std::size_t>(mm)] * detail::cosine_sine_overlap(mm, k, len);
            c[static_cast<std::size_t>(k) - 1] += s;
        }
    }

    for (int k = 1; k <= n; ++k) {
        c[static_cast<std::size_t>(k) - 1] += m.a1 * a[static_cast<std::size_t>(k) - 1];
        if (m.a0 != 0.0)
            c[static_cast<std::size_t>(k) - 1] += m.a0 * detail::cosine_sine_overlap(0, k, len);
    }

    return SpectralField(u.domain(), c);
}

} // namespace oracle
} // namespace spde
