#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spde/experiments.hpp"
#include "spde/integrator.hpp"
#include "spde/oracle.hpp"

using namespace spde;

namespace {

const Domain unit(1.0);

// Exact second moment of the coupled difference of two resolvent chains driven by the
// same Brownian increments (the coarse chain sees sums of the fine increments), per
// mode, by direct covariance recursion.  Written against the scheme definition only,
// independently of the simulation code.
double coupled_diff_second_moment(double lam, double q, double dt, double dt_ref, double t) {
    const int r = static_cast<int>(std::llround(dt / dt_ref));
    const int steps = static_cast<int>(std::llround(t / dt));
    const double ac = 1.0 / (1.0 + lam * dt);
    const double af = 1.0 / (1.0 + lam * dt_ref);
    double gain_sum = 0.0, gain_sq = 0.0, afr = 1.0;
    for (int i = 0; i < r; ++i) {
        // increment i (counting from the end of the coarse step) is hit by af^(i+1)
        afr *= af;
        gain_sum += afr;
        gain_sq += afr * afr;
    }
    double vc = 0.0, vf = 0.0, cf = 0.0;
    for (int k = 0; k < steps; ++k) {
        vc = ac * ac * vc + ac * ac * r * q * dt_ref;
        vf = afr * afr * vf + gain_sq * q * dt_ref;
        cf = ac * afr * cf + ac * gain_sum * q * dt_ref;
    }
    return vc + vf - 2.0 * cf;
}

TemporalCurveParams linear_params(double kappa, int n_modes, long long n_samples) {
    TemporalCurveParams params(SpectralField::zero(unit, n_modes));
    params.base.model = CubicNonlinearity(1e-300, 0.0, 0.0, 0.0);
    params.base.noise = NoiseSpec::power_law(kappa, n_modes);
    params.base.n_samples = n_samples;
    params.base.seed = 77;
    params.n_modes = n_modes;
    params.t_final = 0.5;
    params.dt_list = {0.125, 0.0625};
    params.dt_ref = 0.015625;
    return params;
}

} // namespace

TEST_CASE("functional evaluation at reference points") {
    const SpectralField zero = SpectralField::zero(unit, 3);
    CHECK(evaluate_functional(Functional::cos_norm_sq, zero) == 1.0);
    CHECK(evaluate_functional(Functional::exp_neg_norm_sq, zero) == 1.0);
    CHECK(evaluate_functional(Functional::norm_4, zero) == 0.0);
    CHECK(evaluate_functional(Functional::sqrt2_cos_norm_sq_shift, zero) ==
          doctest::Approx(1.0).epsilon(1e-15));

    const SpectralField one(unit, std::vector<double>{1.0});
    CHECK(evaluate_functional(Functional::sin_norm, one) ==
          doctest::Approx(0.8414709848078965).epsilon(1e-15));
    CHECK(evaluate_functional(Functional::norm_sq, one) == doctest::Approx(1.0));

    CHECK(functional_name(Functional::exp_neg_norm_sq) == "exp_neg_norm_sq");
    CHECK(functional_from_name("norm_4") == Functional::norm_4);
    CHECK_FALSE(functional_from_name("nope").has_value());
}

TEST_CASE("sine initial profile") {
    const SpectralField u = sine_initial(Domain(2.0), 5, 3.0);
    CHECK(u.coeff(1) == doctest::Approx(3.0 * std::sqrt(1.0)).epsilon(1e-15));  // sqrt(L/2)=1
    for (int k = 2; k <= 5; ++k) CHECK(u.coeff(k) == 0.0);
    const SpectralField v = sine_initial(unit, 2, -2.0);
    CHECK(v.coeff(1) == doctest::Approx(-2.0 / std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("rate fitting on exact power data") {
    std::vector<RateRow> rows{{0.5, 0.1, 1e-6, 10, RowFlag::ok},
                              {0.25, 0.05, 1e-6, 10, RowFlag::ok},
                              {0.125, 0.025, 1e-6, 10, RowFlag::ok}};
    const RateTable t = fit_rate(rows);
    REQUIRE(t.slope.has_value());
    CHECK(*t.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*t.slope_se == doctest::Approx(0.0).epsilon(1e-10));

    // slope -2 on h = lambda-style data
    std::vector<RateRow> neg{{16.0, 1.0 / 256.0, 1e-9, 10, RowFlag::ok},
                             {8.0, 1.0 / 64.0, 1e-9, 10, RowFlag::ok},
                             {4.0, 1.0 / 16.0, 1e-9, 10, RowFlag::ok}};
    CHECK(*fit_rate(neg).slope == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("rate fitting flags degenerate rows") {
    // A zero error is flagged by the fit itself; a row the caller has already marked as
    // sitting below the Monte Carlo noise floor is respected and excluded.
    std::vector<RateRow> rows{{0.5, 0.1, 1e-6, 10, RowFlag::ok},
                              {0.25, 0.05, 1e-6, 10, RowFlag::ok},
                              {0.125, 0.025, 1e-6, 10, RowFlag::ok},
                              {0.0625, 0.0, 1e-6, 10, RowFlag::ok},          // exact zero
                              {0.03125, 1e-7, 1e-6, 10, RowFlag::noise_floor}};
    const RateTable t = fit_rate(rows);
    CHECK(t.rows[3].flag == RowFlag::zero_error);
    CHECK(t.rows[4].flag == RowFlag::noise_floor);
    CHECK(t.n_excluded() == 2);
    REQUIRE(t.slope.has_value());
    CHECK(*t.slope == doctest::Approx(1.0).epsilon(1e-12));

    // too few usable rows: no slope, table still returned
    std::vector<RateRow> few{{0.5, 0.1, 1e-6, 10, RowFlag::ok},
                             {0.25, 0.05, 1e-6, 10, RowFlag::ok}};
    CHECK_FALSE(fit_rate(few).slope.has_value());

    CHECK_THROWS(fit_rate({{0.5, 0.1, 0.0, 1, RowFlag::ok}, {0.5, 0.2, 0.0, 1, RowFlag::ok},
                           {0.25, 0.1, 0.0, 1, RowFlag::ok}}));  // duplicate h
    CHECK_THROWS(fit_rate({{-0.5, 0.1, 0.0, 1, RowFlag::ok}}));  // invalid h
}

TEST_CASE("rate fitting recovers slopes through multiplicative noise") {
    // A h^(1/2) law observed through 5% multiplicative noise: every regeneration must
    // fit back within 0.1 of the true exponent.
    std::mt19937 gen(99);
    std::normal_distribution<double> xi(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<RateRow> rows;
        double h = 0.5;
        for (int i = 0; i < 5; ++i, h /= 2.0)
            rows.push_back(
                {h, 0.7 * std::sqrt(h) * (1.0 + 0.05 * xi(gen)), 1e-9, 100, RowFlag::ok});
        const RateTable t = fit_rate(rows);
        REQUIRE(t.slope.has_value());
        CHECK(std::abs(*t.slope - 0.5) <= 0.1);
    }
}

TEST_CASE("strong error pipeline matches the exact linear computation") {
    // With a vanishing drift the chain is the discrete stochastic convolution, whose
    // coupled difference moment is computable in closed form.  This validates the
    // coupling, the coarsening, the parallel scheduling, and the estimator together.
    const int n = 8;
    TemporalCurveParams params = linear_params(0.5, n, 400);
    const StrongCurveResult res = strong_error_curve(params);
    REQUIRE(res.table.rows.size() == 2);
    CHECK(res.n_failed == 0);

    for (const RateRow& row : res.table.rows) {
        double exact_m2 = 0.0;
        for (int j = 1; j <= n; ++j)
            exact_m2 += coupled_diff_second_moment(
                eigenvalue(j, 1.0), q_coefficient(params.base.noise, j), row.h,
                params.dt_ref, params.t_final);
        const double exact = std::sqrt(exact_m2);
        // err is a Monte Carlo estimate of `exact`; se is its propagated standard error
        CHECK(std::abs(row.err - exact) <= 4.0 * row.se + 1e-12);
        CHECK(row.se < 0.1 * row.err);  // the estimate is actually informative
    }
}

TEST_CASE("weak error pipeline matches the oracle difference") {
    // For the linear model the expectation of ||X||^2 under each discretization is exact,
    // so the weak error estimate must agree with the closed-form difference within MC
    // error.  The coupling only reduces variance; it cannot move the mean.
    const int n = 8;
    TemporalCurveParams params = linear_params(0.5, n, 4000);
    const WeakCurveResult res = weak_error_curve(params, {Functional::norm_sq});
    REQUIRE(res.tables.size() == 1);
    const RateTable& table = res.tables[0];
    REQUIRE(table.rows.size() == 2);

    oracle::GaussianModeState init;
    init.mean.assign(n, 0.0);
    init.var.assign(n, 0.0);
    const oracle::LinearModel lm{0.0};
    const auto second_moment = [&](double dt) {
        const auto s = oracle::discrete_moments(
            init, static_cast<int>(std::llround(params.t_final / dt)), dt, lm,
            params.base.noise, unit);
        return oracle::gaussian_functional(s, oracle::GaussianFunctional::norm_sq);
    };
    const double ref = second_moment(params.dt_ref);
    for (const RateRow& row : table.rows) {
        const double exact = std::abs(second_moment(row.h) - ref);
        CHECK(std::abs(row.err - exact) <= 4.0 * row.se + 1e-12);
    }
}

TEST_CASE("weak error against the exact law decays at first order") {
    // Linear model with smooth noise (kappa = 2): the time-T law is Gaussian with
    // moments given by the continuous oracle, so the weak error of ||X||^2 needs no
    // Monte Carlo reference chain, and its decay exposes the first-order weak rate
    // without reference bias.
    const int n = 8, n_traj = 4000;
    const double t_final = 0.125;
    const std::vector<double> dts{0.03125, 0.015625, 0.0078125};
    const double dt_fine = dts.back();
    const int steps_fine = static_cast<int>(std::llround(t_final / dt_fine));
    const CubicNonlinearity lin(1e-300, 0.0, 0.0, 0.0);
    const NoiseSpec spec = NoiseSpec::power_law(2.0, n);
    std::vector<double> x0c(n, 0.0);
    x0c[0] = 2.0;
    const SpectralField x0(unit, x0c);

    std::vector<SchemeConfig> cfgs;
    for (const double dt : dts)
        cfgs.push_back(SchemeConfig::create(
            n, dt, static_cast<int>(std::llround(t_final / dt)), lin, unit));

    std::vector<double> acc(dts.size(), 0.0), acc2(dts.size(), 0.0);
    for (int t = 0; t < n_traj; ++t) {
        const IncrementBlock fine = sample_increments(spec, 206, t, steps_fine, dt_fine);
        for (std::size_t l = 0; l < dts.size(); ++l) {
            const int factor = static_cast<int>(std::llround(dts[l] / dt_fine));
            const IncrementBlock block = factor == 1 ? fine : coarsen(fine, factor);
            const Trajectory tr = simulate_path(unit, cfgs[l], lin, x0, block);
            const double phi = evaluate_functional(Functional::norm_sq, tr.states.back());
            acc[l] += phi;
            acc2[l] += phi * phi;
        }
    }

    oracle::GaussianModeState init;
    init.mean = x0c;
    init.var.assign(n, 0.0);
    const oracle::GaussianModeState law =
        oracle::continuous_moments(init, t_final, oracle::LinearModel{0.0}, spec, unit);
    const double exact = oracle::gaussian_functional(law, oracle::GaussianFunctional::norm_sq);

    std::vector<RateRow> rows;
    for (std::size_t l = 0; l < dts.size(); ++l) {
        const double mean = acc[l] / n_traj;
        const double var = (acc2[l] - n_traj * mean * mean) / (n_traj - 1);
        rows.push_back({dts[l], std::abs(mean - exact), std::sqrt(var / n_traj), n_traj,
                        RowFlag::ok});
        CHECK(rows.back().err > 3.0 * rows.back().se);  // well above the noise floor
    }
    const RateTable table = fit_rate(rows);
    REQUIRE(table.slope.has_value());
    CHECK(*table.slope >= 0.8);
    CHECK(*table.slope <= 1.2);
}

TEST_CASE("pairing by common random numbers does not inflate the error bar") {
    // The weak-error estimator differences functionals of coupled paths; its standard
    // error must be no larger than the one an unpaired difference of the same samples
    // would carry, and the coupling should in fact shrink it substantially.
    const int n = 8, steps_fine = 16, factor = 4, n_traj = 400;
    const double dt_fine = 0.03125;
    const CubicNonlinearity m(1.0, 0.0, 5.0, 0.0);
    const SchemeConfig cfg_f = SchemeConfig::create(n, dt_fine, steps_fine, m, unit);
    const SchemeConfig cfg_c =
        SchemeConfig::create(n, dt_fine * factor, steps_fine / factor, m, unit);
    const NoiseSpec spec = NoiseSpec::power_law(0.0, n);
    const SpectralField x0 = sine_initial(unit, n, 1.0);

    double sd1 = 0.0, sd2 = 0.0, sc1 = 0.0, sc2 = 0.0, sf1 = 0.0, sf2 = 0.0;
    for (int t = 0; t < n_traj; ++t) {
        const IncrementBlock fine = sample_increments(spec, 54, t, steps_fine, dt_fine);
        const IncrementBlock coarse = coarsen(fine, factor);
        const double pc = evaluate_functional(
            Functional::exp_neg_norm_sq, simulate_path(unit, cfg_c, m, x0, coarse).states.back());
        const double pf = evaluate_functional(
            Functional::exp_neg_norm_sq, simulate_path(unit, cfg_f, m, x0, fine).states.back());
        const double d = pc - pf;
        sd1 += d;
        sd2 += d * d;
        sc1 += pc;
        sc2 += pc * pc;
        sf1 += pf;
        sf2 += pf * pf;
    }
    const auto var_of = [&](double s, double s2) {
        const double mu = s / n_traj;
        return (s2 - n_traj * mu * mu) / (n_traj - 1);
    };
    const double se_paired = std::sqrt(var_of(sd1, sd2) / n_traj);
    const double se_unpaired = std::sqrt((var_of(sc1, sc2) + var_of(sf1, sf2)) / n_traj);
    CHECK(se_paired <= se_unpaired);
    CHECK(se_paired < 0.5 * se_unpaired);  // the coupling actually bites
}

TEST_CASE("experiments are reproducible across worker counts") {
    const int n = 6;
    for (int kappa_case = 0; kappa_case < 2; ++kappa_case) {
        TemporalCurveParams params = linear_params(kappa_case == 0 ? 0.0 : 2.0, n, 48);
        params.base.model = CubicNonlinearity(1.0, 0.0, 5.0, 0.0);  // real nonlinearity
        params.base.workers = 1;
        const WeakCurveResult a = weak_error_curve(params, {Functional::exp_neg_norm_sq});
        params.base.workers = 2;
        const WeakCurveResult b = weak_error_curve(params, {Functional::exp_neg_norm_sq});
        params.base.workers = 8;
        const WeakCurveResult c = weak_error_curve(params, {Functional::exp_neg_norm_sq});
        for (std::size_t i = 0; i < a.tables[0].rows.size(); ++i) {
            CHECK(a.tables[0].rows[i].err == b.tables[0].rows[i].err);
            CHECK(a.tables[0].rows[i].err == c.tables[0].rows[i].err);
            CHECK(a.tables[0].rows[i].se == c.tables[0].rows[i].se);
        }
    }
}

TEST_CASE("spatial curve produces lambda-keyed rows") {
    SpatialCurveParams params(sine_initial(unit, 16, 1.0));
    params.base.model = CubicNonlinearity(1.0, 0.0, 5.0, 0.0);
    params.base.noise = NoiseSpec::power_law(0.5, 16);
    params.base.n_samples = 32;
    params.base.seed = 5;
    params.n_list = {4, 8};
    params.n_ref = 16;
    params.dt = 0.03125;
    params.t_final = 0.25;
    const WeakCurveResult res = spatial_weak_error_curve(params, {Functional::norm_sq});
    REQUIRE(res.tables.size() == 1);
    REQUIRE(res.tables[0].rows.size() == 2);
    // rows keyed by lambda_N, sorted descending: lambda_8 then lambda_4
    CHECK(res.tables[0].rows[0].h == doctest::Approx(eigenvalue(8, 1.0)).epsilon(1e-15));
    CHECK(res.tables[0].rows[1].h == doctest::Approx(eigenvalue(4, 1.0)).epsilon(1e-15));
    CHECK(res.tables[0].rows[0].err >= 0.0);
    CHECK(res.n_failed == 0);

    // Projection error decays with N, up to Monte Carlo resolution: the N=8 row may not
    // sit above the N=4 row by more than two combined standard errors.
    const RateRow& fine_row = res.tables[0].rows[0];
    const RateRow& coarse_row = res.tables[0].rows[1];
    CHECK(fine_row.err <=
          coarse_row.err + 2.0 * std::sqrt(fine_row.se * fine_row.se +
                                           coarse_row.se * coarse_row.se));

    params.n_list = {4, 16};  // level equal to the reference is rejected
    CHECK_THROWS(spatial_weak_error_curve(params, {Functional::norm_sq}));
}

TEST_CASE("spatial error vanishes when truncation changes nothing") {
    // Noise only in mode 1 and single-mode initial data: every Galerkin level runs the
    // same per-mode recursion as the reference, so the weak error is exactly zero and
    // the rows come back flagged instead of feeding a bogus fit.
    SpatialCurveParams params(sine_initial(unit, 8, 1.0));
    params.base.model = CubicNonlinearity(1e-300, 0.0, 0.0, 0.0);
    params.base.noise = NoiseSpec::power_law(0.0, 1);  // a single driven mode
    params.base.n_samples = 16;
    params.base.seed = 12;
    params.n_list = {2, 4};
    params.n_ref = 8;
    params.dt = 0.0625;
    params.t_final = 0.25;
    const WeakCurveResult res = spatial_weak_error_curve(params, {Functional::norm_sq});
    REQUIRE(res.tables[0].rows.size() == 2);
    for (const RateRow& row : res.tables[0].rows) {
        CHECK(row.err == 0.0);
        CHECK(row.flag == RowFlag::zero_error);
    }
    CHECK_FALSE(res.tables[0].slope.has_value());
}

TEST_CASE("ergodicity run couples ensembles synchronously") {
    ErgodicityParams params;
    params.base.model = CubicNonlinearity(1.0, 0.0, 5.0, 0.0);
    params.base.noise = NoiseSpec::power_law(0.0, 8);
    params.base.n_samples = 24;
    params.base.seed = 9;
    params.n_modes = 8;
    params.dt = 0.0625;
    params.t_final = 1.0;
    params.stride = 4;
    params.inits = {sine_initial(unit, 8, -1.0), sine_initial(unit, 8, 0.0),
                    sine_initial(unit, 8, 1.0)};
    params.phis = {Functional::sin_norm_sq, Functional::exp_neg_norm_sq};

    const ErgodicitySeries series = ergodicity_run(params);
    REQUIRE(series.estimates.size() == 3);
    REQUIRE(series.estimates[0].size() == 2);
    REQUIRE(series.estimates[0][0].size() == series.times.size());
    CHECK(series.times.front() == 0.0);
    CHECK(series.times.back() == doctest::Approx(1.0));
    CHECK(series.n_failed == 0);

    // At t=0 the ensembles sit exactly at their initial functional values.
    CHECK(series.estimates[1][1][0].mean == doctest::Approx(1.0));  // exp(-0) at zero init
    CHECK(series.estimates[1][1][0].std_error == 0.0);

    // Dissipative drift with shared noise: ensembles contract toward each other.  The
    // comparison uses the zero and unit initial conditions (the +-1 pair has equal norms,
    // so every norm-based functional starts at distance zero there).
    const double d0 = std::abs(series.estimates[1][1][0].mean - series.estimates[2][1][0].mean);
    const std::size_t last = series.times.size() - 1;
    const double dT =
        std::abs(series.estimates[1][1][last].mean - series.estimates[2][1][last].mean);
    CHECK(d0 > 0.1);
    CHECK(dT < 0.05 * d0);

    // Bitwise reproducibility across worker counts.
    ErgodicityParams par2 = params;
    par2.base.workers = 8;
    const ErgodicitySeries again = ergodicity_run(par2);
    CHECK(again.estimates[0][0][last].mean == series.estimates[0][0][last].mean);
    CHECK(again.estimates[2][1][last].std_error == series.estimates[2][1][last].std_error);

    // Identical initial values reproduce identical series under the same seed.
    ErgodicityParams twin_params = params;
    twin_params.inits = {sine_initial(unit, 8, 1.0), sine_initial(unit, 8, 1.0)};
    const ErgodicitySeries twin = ergodicity_run(twin_params);
    REQUIRE(twin.estimates.size() == 2);
    for (std::size_t f = 0; f < twin.estimates[0].size(); ++f)
        for (std::size_t t = 0; t < twin.times.size(); ++t) {
            CHECK(twin.estimates[0][f][t].mean == twin.estimates[1][f][t].mean);
            CHECK(twin.estimates[0][f][t].std_error == twin.estimates[1][f][t].std_error);
        }
}

TEST_CASE("failed trajectories abort the experiment loudly") {
    TemporalCurveParams params = linear_params(0.0, 4, 16);
    params.base.model = CubicNonlinearity(1.0, 0.0, 5.0, 0.0);
    params.base.max_iter = 1;   // Newton cannot converge in one iteration at this tol
    params.base.tol = 1e-14;
    CHECK_THROWS_AS((void)strong_error_curve(params), std::runtime_error);
}

TEST_CASE("temporal parameter validation") {
    TemporalCurveParams params = linear_params(0.0, 4, 8);
    params.dt_list = {0.1};  // not a multiple of dt_ref
    CHECK_THROWS(strong_error_curve(params));
    params = linear_params(0.0, 4, 8);
    params.dt_list = {0.0625, 0.125};  // unsorted input is normalized to descending h
    const WeakCurveResult unsorted = weak_error_curve(params, {Functional::norm_sq});
    REQUIRE(unsorted.tables.size() == 1);
    REQUIRE(unsorted.tables[0].rows.size() == 2);
    CHECK(unsorted.tables[0].rows[0].h == doctest::Approx(0.125));
    CHECK(unsorted.tables[0].rows[1].h == doctest::Approx(0.0625));
    params = linear_params(0.0, 4, 8);
    params.dt_list = {0.125, 0.125};  // duplicate step sizes are rejected
    CHECK_THROWS(weak_error_curve(params, {Functional::norm_sq}));
    params = linear_params(0.0, 4, 1);  // fewer than 2 samples
    CHECK_THROWS(strong_error_curve(params));

    // A single step size is allowed: the table comes back, the fit is refused.
    params = linear_params(0.5, 4, 16);
    params.dt_list = {0.125};
    const StrongCurveResult single = strong_error_curve(params);
    REQUIRE(single.table.rows.size() == 1);
    CHECK(single.table.rows[0].h == doctest::Approx(0.125));
    CHECK_FALSE(single.table.slope.has_value());
}
