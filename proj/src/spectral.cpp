#include "spde/spectral.hpp"

#include <complex>
#include <numbers>

namespace spde {

namespace {

constexpr double pi = std::numbers::pi;

void require_mode_count(int n_modes) {
    if (n_modes < 1)
        throw std::invalid_argument("spectral: n_modes must be >= 1, got " +
                                    std::to_string(n_modes));
}

} // namespace

double eigenvalue(int k, double length) {
    if (k < 1)
        throw std::invalid_argument("eigenvalue: mode index must be >= 1, got " +
                                    std::to_string(k));
    if (!std::isfinite(length) || length <= 0.0)
        throw std::invalid_argument("eigenvalue: length must be positive and finite");
    const double w = static_cast<double>(k) * pi / length;
    return w * w;
}

SineBasis::SineBasis(Domain domain, int n_modes, int n_grid, bool with_cosines)
    : domain_(domain), n_modes_(n_modes), n_grid_(n_grid) {
    require_mode_count(n_modes);
    if (n_grid < n_modes)
        throw std::invalid_argument("SineBasis: n_grid must be >= n_modes (grid cannot "
                                    "resolve the highest retained mode)");

    const int p = n_grid + 1;
    const double scale = std::sqrt(2.0 / domain_.length);

    // Angles are reduced modulo the full period 2P in exact integer arithmetic before
    // calling sin/cos, so table entries stay accurate for large i * k.
    sines_.resize(n_grid, n_modes);
    for (int i = 1; i <= n_grid; ++i)
        for (int k = 1; k <= n_modes; ++k) {
            const long long m = (static_cast<long long>(i) * k) % (2LL * p);
            sines_(i - 1, k - 1) = scale * std::sin(pi * static_cast<double>(m) / p);
        }

    if (with_cosines) {
        cosines_.resize(n_grid, 2 * n_modes + 1);
        for (int i = 1; i <= n_grid; ++i)
            for (int m = 0; m <= 2 * n_modes; ++m) {
                const long long r = (static_cast<long long>(i) * m) % (2LL * p);
                cosines_(i - 1, m) = std::cos(pi * static_cast<double>(r) / p);
            }
    }
}

void SineBasis::synthesize(const double* coeffs, double* grid) const {
    Eigen::Map<const Eigen::VectorXd> c(coeffs, n_modes_);
    Eigen::Map<Eigen::VectorXd> g(grid, n_grid_);
    g.noalias() = sines_ * c;
}

void SineBasis::analyze(const double* grid, double* coeffs) const {
    // The interior sine quadrature (L/P) sum_i is exact for integrands whose sine
    // expansion has frequencies below 2P - n_modes, in particular for any product of
    // retained basis functions once n_grid = 4 * n_modes.
    Eigen::Map<const Eigen::VectorXd> g(grid, n_grid_);
    Eigen::Map<Eigen::VectorXd> c(coeffs, n_modes_);
    const double w = domain_.length / static_cast<double>(n_grid_ + 1);
    c.noalias() = w * (sines_.transpose() * g);
}

void SineBasis::cosine_moments(const double* grid, double* moments) const {
    if (cosines_.size() == 0)
        throw std::logic_error("SineBasis: cosine table not built (construct with "
                               "with_cosines = true)");
    Eigen::Map<const Eigen::VectorXd> g(grid, n_grid_);
    Eigen::Map<Eigen::VectorXd> m(moments, 2 * n_modes_ + 1);
    m.noalias() = cosines_.transpose() * g;
}

namespace detail {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

// Iterative radix-2 FFT with a precomputed full-circle twiddle table; length must be a
// power of two.
void fft_pow2(std::vector<std::complex<double>>& a,
              const std::vector<std::complex<double>>& table) {
    const int n = static_cast<int>(a.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const int stride = n / len;
        for (int i = 0; i < n; i += len)
            for (int j = 0; j < len / 2; ++j) {
                const std::complex<double> w = table[static_cast<std::size_t>(j) * stride];
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
    }
}

} // namespace

std::vector<double> dst1_pow2(const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    const int p = m + 1;
    if (!is_pow2(p))
        throw std::invalid_argument("dst1_pow2: size + 1 must be a power of two");

    const int n = 2 * p;
    std::vector<std::complex<double>> table(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        table[j] = std::polar(1.0, -pi * static_cast<double>(j) / p);

    // Odd extension over the doubled interval turns the DST into the imaginary part of
    // a length-2P DFT: A_k = -2i sum_i x_i sin(pi i k / P).
    std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
    for (int i = 1; i <= m; ++i) {
        a[i] = x[i - 1];
        a[n - i] = -x[i - 1];
    }
    fft_pow2(a, table);

    std::vector<double> out(static_cast<std::size_t>(m));
    for (int k = 1; k <= m; ++k)
        out[k - 1] = -0.5 * a[k].imag();
    return out;
}

} // namespace detail

GridField to_grid(const SpectralField& u, int n_grid) {
    const int n = u.n_modes();
    if (n_grid < n)
        throw std::invalid_argument("to_grid: n_grid must be >= n_modes, got " +
                                    std::to_string(n_grid) + " < " + std::to_string(n));

    const double scale = std::sqrt(2.0 / u.domain().length);
    if (detail::is_pow2(n_grid + 1)) {
        std::vector<double> c(static_cast<std::size_t>(n_grid), 0.0);
        for (int k = 0; k < n; ++k) c[k] = scale * u.coeffs()[k];
        return GridField(u.domain(), detail::dst1_pow2(c));
    }

    SineBasis basis(u.domain(), n, n_grid);
    std::vector<double> g(static_cast<std::size_t>(n_grid));
    basis.synthesize(u.coeffs().data(), g.data());
    return GridField(u.domain(), g);
}

SpectralField to_spectral(const GridField& g, int n_modes) {
    require_mode_count(n_modes);
    const int m = g.n_points();
    if (n_modes > m)
        throw std::invalid_argument("to_spectral: n_modes must be <= n_points (quadrature "
                                    "cannot separate aliased modes)");

    if (detail::is_pow2(m + 1)) {
        const std::vector<double> s = detail::dst1_pow2(g.values());
        const double w = g.domain().length / static_cast<double>(m + 1) *
                         std::sqrt(2.0 / g.domain().length);
        std::vector<double> c(static_cast<std::size_t>(n_modes));
        for (int k = 0; k < n_modes; ++k) c[k] = w * s[k];
        return SpectralField(g.domain(), c);
    }

    SineBasis basis(g.domain(), n_modes, m);
    std::vector<double> c(static_cast<std::size_t>(n_modes));
    basis.analyze(g.values().data(), c.data());
    return SpectralField(g.domain(), c);
}

SpectralField resolvent_apply(const SpectralField& u, double dt) {
    if (!std::isfinite(dt) || dt <= 0.0)
        throw std::invalid_argument("resolvent_apply: dt must be positive and finite");
    std::vector<double> c = u.coeffs();
    for (int k = 1; k <= u.n_modes(); ++k)
        c[k - 1] /= 1.0 + dt * eigenvalue(k, u.domain().length);
    return SpectralField(u.domain(), c);
}

SpectralField semigroup_apply(const SpectralField& u, double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("semigroup_apply: t must be >= 0 and finite");
    std::vector<double> c = u.coeffs();
    for (int k = 1; k <= u.n_modes(); ++k)
        c[k - 1] *= std::exp(-t * eigenvalue(k, u.domain().length));
    return SpectralField(u.domain(), c);
}

SpectralField fractional_apply(const SpectralField& u, double r) {
    if (!std::isfinite(r))
        throw std::invalid_argument("fractional_apply: exponent must be finite");
    std::vector<double> c = u.coeffs();
    for (int k = 1; k <= u.n_modes(); ++k)
        c[k - 1] *= std::pow(eigenvalue(k, u.domain().length), 0.5 * r);
    return SpectralField(u.domain(), c);
}

double sup_norm(const SpectralField& u, int n_grid) {
    if (n_grid < 4 * u.n_modes())
        throw std::invalid_argument("sup_norm: n_grid must be >= 4 * n_modes for a "
                                    "trustworthy maximum");
    return to_grid(u, n_grid).max_abs();
}

} // namespace spde
