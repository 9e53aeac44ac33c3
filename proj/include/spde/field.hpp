#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spde {

/// Spatial domain (0, length) with homogeneous Dirichlet boundary conditions.
struct Domain {
    double length = 1.0;

    Domain() = default;

    explicit Domain(double len) : length(len) {
        if (!std::isfinite(len) || len <= 0.0)
            throw std::invalid_argument("Domain: length must be positive and finite, got " +
                                        std::to_string(len));
    }
};

namespace detail {

inline void require_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(what) + ": entries must be finite");
}

} // namespace detail

/// Coefficient vector of a function u = sum_k coeffs[k-1] * e_k with respect to the
/// Dirichlet eigenbasis e_k(x) = sqrt(2/L) sin(k pi x / L), k = 1..N.
class SpectralField {
public:
    SpectralField(Domain domain, std::vector<double> coeffs)
        : domain_(domain), coeffs_(std::move(coeffs)) {
        if (coeffs_.empty())
            throw std::invalid_argument("SpectralField: need at least one mode");
        detail::require_finite(coeffs_, "SpectralField");
    }

    static SpectralField zero(Domain domain, int n_modes) {
        if (n_modes < 1)
            throw std::invalid_argument("SpectralField::zero: n_modes must be >= 1");
        return SpectralField(domain, std::vector<double>(static_cast<std::size_t>(n_modes), 0.0));
    }

    const Domain& domain() const { return domain_; }
    int n_modes() const { return static_cast<int>(coeffs_.size()); }

    const std::vector<double>& coeffs() const { return coeffs_; }
    double coeff(int k) const { return coeffs_.at(static_cast<std::size_t>(k) - 1); } // 1-based mode index

    /// L2(0, L) norm; the basis is orthonormal, so this is the euclidean norm of the coefficients.
    double l2_norm() const {
        double s = 0.0;
        for (double c : coeffs_) s += c * c;
        return std::sqrt(s);
    }

    double l2_norm_sq() const {
        double s = 0.0;
        for (double c : coeffs_) s += c * c;
        return s;
    }

private:
    Domain domain_;
    std::vector<double> coeffs_;
};

/// Point values of a function on the uniform interior grid x_i = i L / (M + 1), i = 1..M.
/// The boundary values x_0 = 0 and x_{M+1} = L are identically zero and not stored.
class GridField {
public:
    GridField(Domain domain, std::vector<double> values)
        : domain_(domain), values_(std::move(values)) {
        if (values_.empty())
            throw std::invalid_argument("GridField: need at least one grid point");
        detail::require_finite(values_, "GridField");
    }

    const Domain& domain() const { return domain_; }
    int n_points() const { return static_cast<int>(values_.size()); }

    const std::vector<double>& values() const { return values_; }
    double value(int i) const { return values_.at(static_cast<std::size_t>(i) - 1); } // 1-based grid index

    /// Grid coordinate of the i-th stored point (1-based).
    double point(int i) const {
        if (i < 1 || i > n_points())
            throw std::out_of_range("GridField::point: index out of range");
        return domain_.length * static_cast<double>(i) / static_cast<double>(n_points() + 1);
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    Domain domain_;
    std::vector<double> values_;
};

} // namespace spde
