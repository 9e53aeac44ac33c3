#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "spde/noise.hpp"
#include "spde/rng.hpp"

using namespace spde;

TEST_CASE("mode variances follow the power law") {
    const NoiseSpec flat = NoiseSpec::power_law(0.0, 16);
    for (int j = 1; j <= 16; ++j) CHECK(q_coefficient(flat, j) == doctest::Approx(0.25));
    CHECK(q_coefficient(flat, 17) == 0.0);  // beyond the truncation
    CHECK_THROWS(q_coefficient(flat, 0));

    const NoiseSpec smooth = NoiseSpec::power_law(2.0, 8);
    CHECK(q_coefficient(smooth, 3) == doctest::Approx(0.01).epsilon(1e-15));  // (1+9)^-2
    CHECK(q_coefficient(smooth, 1) == doctest::Approx(0.25).epsilon(1e-15));

    const NoiseSpec listed = NoiseSpec::explicit_list({0.5, 0.0, 0.125});
    CHECK(q_coefficient(listed, 1) == 0.5);
    CHECK(q_coefficient(listed, 2) == 0.0);
    CHECK(q_coefficient(listed, 3) == 0.125);
    CHECK(q_coefficient(listed, 4) == 0.0);

    CHECK_THROWS(NoiseSpec::power_law(-0.5, 8));
    CHECK_THROWS(NoiseSpec::power_law(1.0, 0));
    CHECK_THROWS(NoiseSpec::explicit_list({}));
    CHECK_THROWS(NoiseSpec::explicit_list({1.0, -0.5}));
}

TEST_CASE("regularity exponent beta") {
    CHECK(beta_max(NoiseSpec::power_law(0.0, 64), 1.0).beta == doctest::Approx(0.5));
    CHECK(beta_max(NoiseSpec::power_law(0.0, 64), 1.0).exact);
    CHECK(beta_max(NoiseSpec::power_law(0.5, 64), 1.0).beta == doctest::Approx(1.0));
    CHECK(beta_max(NoiseSpec::power_law(2.0, 64), 1.0).beta == doctest::Approx(2.0));
    CHECK(beta_max(NoiseSpec::power_law(3.0, 64), 1.0).beta == doctest::Approx(2.0));  // cap

    // An explicit list sampled from a power law should recover kappa + 1/2 approximately.
    std::vector<double> q(64);
    for (int j = 1; j <= 64; ++j) q[j - 1] = std::pow(1.0 + std::pow(j, 0.5), -2.0);
    const BetaEstimate est = beta_max(NoiseSpec::explicit_list(q), 1.0);
    CHECK_FALSE(est.exact);
    CHECK(est.beta == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("counter-based normal draws are deterministic and well distributed") {
    CHECK(rng::normal_draw(42, 7, 19) == rng::normal_draw(42, 7, 19));
    CHECK(rng::normal_draw(42, 7, 19) != rng::normal_draw(42, 8, 19));
    CHECK(rng::normal_draw(42, 7, 19) != rng::normal_draw(43, 7, 19));
    CHECK(rng::normal_draw(42, 7, 19) != rng::normal_draw(42, 7, 20));

    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng::normal_draw(1234, 0, i);
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    std::vector<double> block(37);
    rng::normal_fill(1234, 5, 11, block);
    for (std::size_t i = 0; i < block.size(); ++i)
        CHECK(block[i] == rng::normal_draw(1234, 5, 11 + static_cast<std::uint64_t>(i)));
}

TEST_CASE("increment blocks carry scaled Gaussian increments") {
    const NoiseSpec spec = NoiseSpec::power_law(2.0, 6);
    const double dt = 0.03125;
    const IncrementBlock block = sample_increments(spec, 99, 3, 20000, dt);
    CHECK(block.steps() == 20000);
    CHECK(block.modes() == 6);
    CHECK(block.dt() == dt);

    for (int j = 1; j <= 6; ++j) {
        double s2 = 0.0;
        for (int k = 0; k < block.steps(); ++k) s2 += block.at(k, j) * block.at(k, j);
        const double var = s2 / block.steps();
        const double expect = q_coefficient(spec, j) * dt;
        CHECK(var == doctest::Approx(expect).epsilon(0.05));
    }

    // Reproducible per (seed, trajectory); distinct across trajectories.
    const IncrementBlock again = sample_increments(spec, 99, 3, 100, dt);
    const IncrementBlock other = sample_increments(spec, 99, 4, 100, dt);
    CHECK(again.at(0, 1) == block.at(0, 1));
    CHECK(again.at(50, 3) == block.at(50, 3));
    CHECK(other.at(0, 1) != block.at(0, 1));
}

TEST_CASE("modes of an increment block are uncorrelated") {
    const NoiseSpec spec = NoiseSpec::power_law(0.5, 4);
    const int n = 100000;
    const IncrementBlock block = sample_increments(spec, 31, 0, n, 0.25);
    const double bound = 4.0 / std::sqrt(static_cast<double>(n));
    for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j) {
            double si = 0.0, sj = 0.0, sii = 0.0, sjj = 0.0, sij = 0.0;
            for (int k = 0; k < n; ++k) {
                const double a = block.at(k, i);
                const double b = block.at(k, j);
                si += a;
                sj += b;
                sii += a * a;
                sjj += b * b;
                sij += a * b;
            }
            const double vi = sii / n - (si / n) * (si / n);
            const double vj = sjj / n - (sj / n) * (sj / n);
            const double r = (sij / n - (si / n) * (sj / n)) / std::sqrt(vi * vj);
            CHECK(std::abs(r) < bound);
        }
}

TEST_CASE("coarsening sums fine increments exactly") {
    const NoiseSpec spec = NoiseSpec::power_law(0.5, 4);
    const IncrementBlock fine = sample_increments(spec, 5, 0, 24, 0.001953125);
    const IncrementBlock coarse = coarsen(fine, 4);
    CHECK(coarse.steps() == 6);
    CHECK(coarse.dt() == doctest::Approx(0.0078125).epsilon(1e-15));
    for (int k = 0; k < 6; ++k)
        for (int j = 1; j <= 4; ++j) {
            double s = 0.0;
            for (int i = 0; i < 4; ++i) s += fine.at(4 * k + i, j);
            CHECK(coarse.at(k, j) == doctest::Approx(s).epsilon(1e-15));
        }

    CHECK_THROWS(coarsen(fine, 5));   // 24 not divisible by 5
    CHECK_THROWS(coarsen(fine, 0));
    const IncrementBlock same = coarsen(fine, 1);
    CHECK(same.at(3, 2) == fine.at(3, 2));
}
