#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spde/model.hpp"
#include "spde/oracle.hpp"

using namespace spde;

namespace {

SpectralField random_field(Domain dom, int n, unsigned tag) {
    std::mt19937 gen(tag);
    std::normal_distribution<double> dist;
    std::vector<double> c(static_cast<std::size_t>(n));
    for (double& v : c) v = dist(gen) / (1.0 + static_cast<double>(&v - c.data()));
    return SpectralField(dom, c);
}

} // namespace

TEST_CASE("pointwise cubic evaluation") {
    const CubicNonlinearity m(1.0, 0.0, 5.0, 0.0);  // f = -x^3 + 5x
    CHECK(f_pointwise(2.0, m) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f_pointwise(-1.0, m) == doctest::Approx(-4.0).epsilon(1e-15));
    CHECK(f_prime(1.0, m) == doctest::Approx(2.0).epsilon(1e-15));
    const CubicNonlinearity g(2.0, -1.0, 0.5, 3.0);
    const double xi = 1.7;
    CHECK(f_pointwise(xi, g) ==
          doctest::Approx(-2.0 * xi * xi * xi - xi * xi + 0.5 * xi + 3.0).epsilon(1e-14));
    CHECK(f_prime(xi, g) == doctest::Approx(-6.0 * xi * xi - 2.0 * xi + 0.5).epsilon(1e-14));
}

TEST_CASE("one-sided Lipschitz constant and growth estimate") {
    CHECK(lambda_f(CubicNonlinearity(1.0, 0.0, 12.0, 0.0)) == doctest::Approx(12.0));
    // a1 + a2^2/(3 a3) = 5 + 4/3
    CHECK(lambda_f(CubicNonlinearity(1.0, 2.0, 5.0, 0.0)) ==
          doctest::Approx(6.333333333333333).epsilon(1e-15));
    const DriftConstants d = drift_constants(CubicNonlinearity(1.0, 2.0, 5.0, 7.0));
    CHECK(d.lambda_f == doctest::Approx(6.333333333333333).epsilon(1e-15));
    CHECK(d.growth_estimate == doctest::Approx(12.0).epsilon(1e-15));

    // lambda_f really bounds f' on a sampled range
    const CubicNonlinearity g(0.3, -1.2, 2.5, 0.0);
    const double lf = lambda_f(g);
    for (int i = -400; i <= 400; ++i) CHECK(f_prime(i * 0.05, g) <= lf + 1e-12);
}

TEST_CASE("model validation") {
    CHECK_THROWS(CubicNonlinearity(0.0, 0.0, 1.0, 0.0));   // a3 must be positive
    CHECK_THROWS(CubicNonlinearity(-1.0, 0.0, 1.0, 0.0));
    CHECK_THROWS(CubicNonlinearity(1.0, std::nan(""), 0.0, 0.0));
}

TEST_CASE("galerkin projection of a pure cubic on one mode") {
    // For u = c e_1 and f = -x^3: hand calculation gives modes (-3/(2L) c^3, 0, c^3/(2L)).
    const CubicNonlinearity m(1.0, 0.0, 0.0, 0.0);
    for (double len : {1.0, 2.5}) {
        const Domain dom(len);
        const double c = 1.3;
        std::vector<double> coeffs(8, 0.0);
        coeffs[0] = c;
        const SpectralField fu = nemytskii(SpectralField(dom, coeffs), m);
        CHECK(fu.coeff(1) == doctest::Approx(-1.5 * c * c * c / len).epsilon(1e-13));
        CHECK(fu.coeff(2) == doctest::Approx(0.0));
        CHECK(fu.coeff(3) == doctest::Approx(0.5 * c * c * c / len).epsilon(1e-13));
        for (int k = 4; k <= 8; ++k) CHECK(std::abs(fu.coeff(k)) < 1e-14);
    }
}

TEST_CASE("galerkin projection of a pure quadratic on one mode") {
    // u = e_1, f = x^2: e_1^2 = (1 - cos(2 pi x/L))/L; its mode-1 coefficient is
    // 2 sqrt(2)/pi + 2 sqrt(2)/(3 pi) = 1.2004217548761416 for L=1 (frozen).
    const CubicNonlinearity m(1e-300, 1.0, 0.0, 0.0);
    const Domain dom(1.0);
    std::vector<double> coeffs(6, 0.0);
    coeffs[0] = 1.0;
    const SpectralField fu = nemytskii(SpectralField(dom, coeffs), m);
    CHECK(fu.coeff(1) == doctest::Approx(1.2004217548761416).epsilon(1e-13));
    CHECK(std::abs(fu.coeff(2)) < 1e-14);  // e_1^2 is even about L/2, e_2 is odd
}

TEST_CASE("constant term projects through the cosine overlap") {
    // f = a0: projection of the constant onto e_k is a0 * 2 sqrt(2 L)/(pi k) for odd k.
    const CubicNonlinearity m(1e-300, 0.0, 0.0, 2.0);
    const Domain dom(1.0);
    const SpectralField fu = nemytskii(SpectralField::zero(dom, 5), m);
    CHECK(fu.coeff(1) == doctest::Approx(2.0 * 0.9003163161571062).epsilon(1e-13));
    CHECK(std::abs(fu.coeff(2)) < 1e-14);
    CHECK(fu.coeff(3) == doctest::Approx(2.0 * 0.3001054387190354).epsilon(1e-13));
    CHECK(std::abs(fu.coeff(4)) < 1e-14);
}

TEST_CASE("transform projection matches the coefficient-space reference") {
    const CubicNonlinearity general(0.7, 0.4, -0.3, 0.2);
    const CubicNonlinearity odd(1.0, 0.0, 5.0, 0.0);
    for (const CubicNonlinearity* m : {&general, &odd}) {
        for (int n : {2, 4, 8, 16, 32}) {
            for (unsigned rep = 0; rep < 25; ++rep) {
                const SpectralField u =
                    random_field(Domain(1.0), n, 997u * rep + static_cast<unsigned>(n));
                const SpectralField fast = nemytskii(u, *m);
                const SpectralField ref = oracle::brute_force_galerkin_cubic(u, *m);
                double scale = 1e-30;
                for (int k = 1; k <= n; ++k) scale = std::max(scale, std::abs(ref.coeff(k)));
                for (int k = 1; k <= n; ++k)
                    CHECK(std::abs(fast.coeff(k) - ref.coeff(k)) / scale < 1e-12);
            }
        }
    }
}

TEST_CASE("dissipativity classification against the first eigenvalue") {
    // lambda_1 = pi^2 on the unit domain: a1 = 5 is dissipative, a1 = 12 is not.
    CHECK(lambda_f(CubicNonlinearity(1.0, 0.0, 5.0, 0.0)) < eigenvalue(1, 1.0));
    CHECK(lambda_f(CubicNonlinearity(1.0, 0.0, 12.0, 0.0)) > eigenvalue(1, 1.0));
}
