#include "spde/model.hpp"

#include <numbers>

namespace spde {

double f_pointwise(double xi, const CubicNonlinearity& m) {
    return ((-m.a3 * xi + m.a2) * xi + m.a1) * xi + m.a0;
}

double f_prime(double xi, const CubicNonlinearity& m) {
    return (-3.0 * m.a3 * xi + 2.0 * m.a2) * xi + m.a1;
}

double lambda_f(const CubicNonlinearity& m) {
    return m.a1 + m.a2 * m.a2 / (3.0 * m.a3);
}

DriftConstants drift_constants(const CubicNonlinearity& m) {
    // |f'(xi)| <= 3 a3 xi^2 + 2|a2||xi| + |a1| <= (3 a3 + 2|a2| + |a1|)(1 + xi^2)
    return DriftConstants{lambda_f(m), 3.0 * m.a3 + 2.0 * std::abs(m.a2) + std::abs(m.a1)};
}

namespace detail {

double cosine_sine_overlap(int m, int k, double length) {
    if (((k + m) & 1) == 0) return 0.0;
    const double k2 = static_cast<double>(k) * k;
    const double m2 = static_cast<double>(m) * m;
    return 2.0 * k * std::sqrt(2.0 * length) / (std::numbers::pi * (k2 - m2));
}

} // namespace detail

SpectralField nemytskii(const SpectralField& u, const CubicNonlinearity& m) {
    const int n = u.n_modes();
    const int grid = 4 * n;
    const bool has_even_part = m.a2 != 0.0 || m.a0 != 0.0;

    SineBasis basis(u.domain(), n, grid, has_even_part);
    std::vector<double> g(static_cast<std::size_t>(grid));
    basis.synthesize(u.coeffs().data(), g.data());

    // Odd part -a3 u^3 + a1 u is a sine polynomial of frequency <= 3N, so the quadrature
    // projection on the 4N grid is exact.
    std::vector<double> fo(static_cast<std::size_t>(grid));
    for (int i = 0; i < grid; ++i) fo[i] = (-m.a3 * g[i] * g[i] + m.a1) * g[i];
    std::vector<double> c(static_cast<std::size_t>(n));
    basis.analyze(fo.data(), c.data());

    if (has_even_part) {
        // The even part a2 u^2 + a0 is a cosine polynomial of frequency <= 2N.  Recover
        // its cosine coefficients by a trapezoidal DCT (exact at this resolution; the
        // boundary values contribute a0 at both ends) and project each cosine mode onto
        // the sine basis in closed form.
        const int p = grid + 1;
        std::vector<double> ev(static_cast<std::size_t>(grid));
        for (int i = 0; i < grid; ++i) ev[i] = m.a2 * g[i] * g[i] + m.a0;
        std::vector<double> cm(static_cast<std::size_t>(2 * n + 1));
        basis.cosine_moments(ev.data(), cm.data());

        std::vector<double> ehat(static_cast<std::size_t>(2 * n + 1));
        ehat[0] = (cm[0] + m.a0) / p;
        for (int mm = 1; mm <= 2 * n; ++mm) {
            const double boundary = (mm % 2 == 0) ? m.a0 : 0.0;
            ehat[mm] = 2.0 * (cm[mm] + boundary) / p;
        }

        for (int k = 1; k <= n; ++k) {
            double s = 0.0;
            for (int mm = (k % 2 == 0) ? 1 : 0; mm <= 2 * n; mm += 2)
                s += ehat[mm] * detail::cosine_sine_overlap(mm, k, u.domain().length);
            c[k - 1] += s;
        }
    }

    return SpectralField(u.domain(), c);
}

} // namespace spde
