// Command-line front end: Monte Carlo convergence studies, ergodicity runs, single-path
// simulation and self-checks, driven by a layered key=value configuration.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spde/config.hpp"
#include "spde/integrator.hpp"
#include "spde/oracle.hpp"
#include "spde/output.hpp"
#include "spde/rng.hpp"

namespace {

using namespace spde;

double theoretical_beta(const RunConfig& cfg, int finest) {
    return beta_max(make_noise(cfg, finest), cfg.length).beta;
}

void preflight_output(const RunConfig& cfg, const std::string& command) {
    // Fail before any simulation if the output location is not writable.
    const std::string probe = cfg.out_prefix + "_" + command + "_meta.json";
    std::ofstream out(probe, std::ios::trunc);
    if (!out) throw std::runtime_error("output prefix not writable: cannot create '" + probe + "'");
    out << "{}\n";
}

void print_table_summary(const NamedTable& nt) {
    std::string line = "  " + nt.name + ": ";
    if (nt.table.slope) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "slope %+.3f (se %.3f)", *nt.table.slope,
                      *nt.table.slope_se);
        line += buf;
    } else {
        line += "slope n/a (too few usable rows)";
    }
    if (nt.has_reference) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), ", reference %+.2f", nt.reference_slope);
        line += buf;
    }
    line += ", rows " + std::to_string(nt.table.rows.size()) + " (excluded " +
            std::to_string(nt.table.n_excluded()) + ")";
    std::cout << line << "\n";
}

void print_solver_summary(const SolveStats& s, long long failed) {
    std::printf("  solver: %lld solves, max %d iterations, max residual %.3g%s%s\n", s.solves,
                s.max_iterations, s.max_residual, s.any_damped ? ", damping engaged" : "",
                failed > 0 ? (", " + std::to_string(failed) + " failed trajectories").c_str()
                           : "");
}

void print_paths(const std::vector<std::string>& paths) {
    for (const std::string& p : paths) std::cout << "  wrote " << p << "\n";
}

int run_weak(const RunConfig& cfg) {
    preflight_output(cfg, "weak");
    const auto phis = make_functionals(cfg.functionals);
    const WeakCurveResult res = weak_error_curve(make_temporal(cfg), phis);
    const double ref = std::min(theoretical_beta(cfg, cfg.n_modes), 1.0);

    std::vector<NamedTable> tables;
    for (std::size_t f = 0; f < phis.size(); ++f)
        tables.push_back({std::string(functional_name(phis[f])), res.tables[f], ref, true});
    for (const NamedTable& nt : tables) print_table_summary(nt);
    print_solver_summary(res.stats, res.n_failed);
    print_paths(emit_rate_results(cfg, "weak", tables, res.stats, res.n_failed, "dt"));
    return 0;
}

int run_strong(const RunConfig& cfg) {
    preflight_output(cfg, "strong");
    const StrongCurveResult res = strong_error_curve(make_temporal(cfg));
    const double ref = 0.5 * theoretical_beta(cfg, cfg.n_modes);

    const std::vector<NamedTable> tables = {{"l2_distance", res.table, ref, true}};
    print_table_summary(tables[0]);
    print_solver_summary(res.stats, res.n_failed);
    print_paths(emit_rate_results(cfg, "strong", tables, res.stats, res.n_failed, "dt"));
    return 0;
}

int run_spatial(const RunConfig& cfg) {
    preflight_output(cfg, "spatial");
    const auto phis = make_functionals(cfg.functionals);
    const WeakCurveResult res = spatial_weak_error_curve(make_spatial(cfg), phis);
    const double ref = -theoretical_beta(cfg, cfg.n_ref);

    std::vector<NamedTable> tables;
    for (std::size_t f = 0; f < phis.size(); ++f)
        tables.push_back({std::string(functional_name(phis[f])), res.tables[f], ref, true});
    for (const NamedTable& nt : tables) print_table_summary(nt);
    print_solver_summary(res.stats, res.n_failed);
    print_paths(emit_rate_results(cfg, "spatial", tables, res.stats, res.n_failed, "lambda_N"));
    return 0;
}

int run_ergodicity(const RunConfig& cfg) {
    preflight_output(cfg, "ergodicity");
    const ErgodicityParams params = make_ergodicity(cfg);
    const ErgodicitySeries series = ergodicity_run(params);

    std::vector<std::string> init_names;
    for (double c : cfg.init_scales) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "c=%g", c);
        init_names.push_back(buf);
    }

    // Final-time agreement across initial conditions: the ergodicity diagnostic.
    for (std::size_t f = 0; f < cfg.erg_functionals.size(); ++f) {
        double max_diff = 0.0, max_se = 0.0;
        for (std::size_t a = 0; a < series.estimates.size(); ++a) {
            const MCEstimate& ea = series.estimates[a][f].back();
            max_se = std::max(max_se, ea.std_error);
            for (std::size_t b = a + 1; b < series.estimates.size(); ++b) {
                const MCEstimate& eb = series.estimates[b][f].back();
                max_diff = std::max(max_diff, std::abs(ea.mean - eb.mean));
            }
        }
        std::printf("  %s: max pairwise final difference %.3g (per-ensemble se up to %.3g)\n",
                    cfg.erg_functionals[f].c_str(), max_diff, max_se);
    }
    print_solver_summary(series.stats, series.n_failed);
    print_paths(emit_ergodicity_results(cfg, series, cfg.erg_functionals, init_names));
    return 0;
}

int run_simulate(const RunConfig& cfg) {
    preflight_output(cfg, "simulate");
    const int steps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    const SchemeConfig scheme =
        SchemeConfig::create(cfg.n_modes, cfg.dt, steps, make_model(cfg), Domain(cfg.length),
                             make_solver(cfg), cfg.tol, cfg.max_iter, cfg.damping);
    const NoiseSpec noise = make_noise(cfg, cfg.n_modes);
    const IncrementBlock block = sample_increments(noise, cfg.seed, 0, steps, cfg.dt);
    const int stride = cfg.stride > 0 ? cfg.stride : std::max(1, steps / 256);
    const Trajectory tr =
        simulate_path(Domain(cfg.length), scheme, make_model(cfg),
                      sine_initial(Domain(cfg.length), cfg.n_modes, cfg.x0_amplitude), block,
                      RecordPolicy::strided(stride));

    const std::string csv = cfg.out_prefix + "_simulate.csv";
    {
        std::ofstream out(csv, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + csv + "'");
        out << "t,l2_norm,sup_norm\n";
        for (std::size_t r = 0; r < tr.times.size(); ++r)
            out << format_g17(tr.times[r]) << ',' << format_g17(tr.states[r].l2_norm()) << ','
                << format_g17(sup_norm(tr.states[r], 4 * cfg.n_modes)) << '\n';
    }

    // Reuse the series plotter for the l2 profile of the single path.
    ErgodicitySeries series;
    series.times = tr.times;
    series.estimates.resize(1);
    series.estimates[0].resize(1);
    for (const SpectralField& s : tr.states)
        series.estimates[0][0].push_back({s.l2_norm(), 0.0, 1});
    const std::string svg = cfg.out_prefix + "_simulate.svg";
    write_ergodicity_svg(svg, "single path: l2 norm  [seed " + std::to_string(cfg.seed) + "]",
                         series, 0, {"path"});

    nlohmann::json meta = {{"version", "0.1.0"},
                           {"command", "simulate"},
                           {"config_hash", config_hash(cfg)},
                           {"seed", cfg.seed},
                           {"steps", steps},
                           {"solver",
                            {{"max_iterations", tr.stats.max_iterations},
                             {"total_iterations", tr.stats.total_iterations},
                             {"solves", tr.stats.solves},
                             {"max_residual", tr.stats.max_residual},
                             {"any_damped", tr.stats.any_damped}}}};
    const std::string meta_path = cfg.out_prefix + "_simulate_meta.json";
    std::ofstream(meta_path, std::ios::trunc) << meta.dump(2) << '\n';

    std::printf("  final l2 norm %.6g, solver max %d iterations\n",
                tr.states.back().l2_norm(), tr.stats.max_iterations);
    print_paths({csv, svg, meta_path});
    return 0;
}

struct CheckRow {
    std::string name;
    double value;
    double threshold;
    bool pass;
};

int finish_checks(const RunConfig& cfg, const std::string& command,
                  const std::vector<CheckRow>& rows) {
    bool all = true;
    for (const CheckRow& r : rows) {
        std::printf("  [%s] %s: %.3g (threshold %.3g)\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.value, r.threshold);
        all = all && r.pass;
    }
    const std::string csv = cfg.out_prefix + "_" + command + ".csv";
    {
        std::ofstream out(csv, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + csv + "'");
        out << "name,value,threshold,pass\n";
        for (const CheckRow& r : rows)
            out << r.name << ',' << format_g17(r.value) << ',' << format_g17(r.threshold) << ','
                << (r.pass ? 1 : 0) << '\n';
    }
    nlohmann::json meta = {{"version", "0.1.0"},
                           {"command", command},
                           {"config_hash", config_hash(cfg)},
                           {"all_pass", all}};
    const std::string meta_path = cfg.out_prefix + "_" + command + "_meta.json";
    std::ofstream(meta_path, std::ios::trunc) << meta.dump(2) << '\n';
    print_paths({csv, meta_path});
    std::printf("  %s\n", all ? "all checks passed" : "CHECKS FAILED");
    return all ? 0 : 1;
}

// Closed-form consistency battery for the Gaussian reference path: the linear chain
// against the exact moment recursion, the stationary fixed point, the functional
// formulas against direct sampling, and first-order convergence of the discrete law.
int run_oracle_check(const RunConfig& cfg) {
    preflight_output(cfg, "oracle-check");
    std::vector<CheckRow> rows;
    const Domain dom(1.0);
    const oracle::LinearModel lin{2.0};
    const NoiseSpec noise = NoiseSpec::power_law(0.5, 16);
    const int n = 16;

    {
        // Mean dynamics: drive the production solver with zero noise and an (effectively)
        // linear drift; every mode must follow the exact recursion.
        const double dt = 0.03125;
        const int steps = 64;
        const CubicNonlinearity tiny_cubic(1e-300, 0.0, lin.a1, 0.0);
        const SchemeConfig scheme = SchemeConfig::create(n, dt, steps, tiny_cubic, dom);
        const NoiseSpec silent = NoiseSpec::explicit_list(std::vector<double>(n, 0.0));
        const IncrementBlock block = sample_increments(silent, 0, 0, steps, dt);
        std::vector<double> c0(n);
        for (int k = 0; k < n; ++k) c0[k] = 1.0 / (1.0 + k);
        const Trajectory tr = simulate_path(dom, scheme, tiny_cubic, SpectralField(dom, c0), block);

        oracle::GaussianModeState init;
        init.mean = c0;
        init.var.assign(n, 0.0);
        const auto ref = oracle::discrete_moments(init, steps, dt, lin, noise, dom);
        double err = 0.0;
        for (int k = 0; k < n; ++k)
            err = std::max(err, std::abs(tr.states.back().coeffs()[k] - ref.mean[k]));
        rows.push_back({"linear_chain_mean_error", err, 1e-10, err <= 1e-10});
    }

    {
        // Stationary law: the fixed point must satisfy the one-step variance recursion.
        const double dt = 0.0625;
        const auto st = oracle::discrete_stationary(lin, noise, dom, dt, n);
        double err = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double rho = (eigenvalue(j, dom.length) - lin.a1) * dt;
            const double v = st.var[j - 1];
            const double next = (v + q_coefficient(noise, j) * dt) / ((1.0 + rho) * (1.0 + rho));
            err = std::max(err, std::abs(next - v) / std::max(v, 1e-30));
        }
        rows.push_back({"stationary_fixed_point_error", err, 1e-12, err <= 1e-12});
    }

    {
        // Functional formulas against one million direct Gaussian samples.
        oracle::GaussianModeState s;
        s.mean = {0.3, -0.2, 0.1, 0.05};
        s.var = {0.5, 0.25, 0.125, 0.0625};
        const long long draws = 1000000;
        double sum_n2 = 0.0, sum_exp = 0.0, sum_n4 = 0.0;
        double ss_n2 = 0.0, ss_exp = 0.0, ss_n4 = 0.0;
        for (long long i = 0; i < draws; ++i) {
            double n2 = 0.0;
            for (std::size_t j = 0; j < s.mean.size(); ++j) {
                const double x =
                    s.mean[j] + std::sqrt(s.var[j]) *
                                    rng::normal_draw(123, static_cast<std::uint64_t>(i), j);
                n2 += x * x;
            }
            const double e = std::exp(-n2), n4 = n2 * n2;
            sum_n2 += n2;
            sum_exp += e;
            sum_n4 += n4;
            ss_n2 += n2 * n2;
            ss_exp += e * e;
            ss_n4 += n4 * n4;
        }
        const auto zscore = [&](double sum, double ss, double exact) {
            const double mean = sum / static_cast<double>(draws);
            const double var = ss / static_cast<double>(draws) - mean * mean;
            const double se = std::sqrt(var / static_cast<double>(draws));
            return std::abs(mean - exact) / se;
        };
        const double z1 = zscore(sum_n2, ss_n2,
                                 gaussian_functional(s, oracle::GaussianFunctional::norm_sq));
        const double z2 = zscore(sum_exp, ss_exp,
                                 gaussian_functional(s, oracle::GaussianFunctional::exp_neg_norm_sq));
        const double z3 = zscore(sum_n4, ss_n4,
                                 gaussian_functional(s, oracle::GaussianFunctional::norm_4));
        rows.push_back({"gaussian_norm_sq_zscore", z1, 3.0, z1 <= 3.0});
        rows.push_back({"gaussian_exp_neg_norm_sq_zscore", z2, 3.0, z2 <= 3.0});
        rows.push_back({"gaussian_norm_4_zscore", z3, 3.0, z3 <= 3.0});
    }

    {
        // First-order weak consistency of the discrete law: halving dt should halve the
        // gap between discrete and continuous second moments.  The steps must be small
        // enough that even the stiffest retained mode sits in the asymptotic regime.
        oracle::GaussianModeState init;
        init.mean.assign(n, 0.0);
        init.var.assign(n, 0.0);
        const double t = 1.0;
        const auto exact = oracle::continuous_moments(init, t, lin, noise, dom);
        const auto gap = [&](double dt) {
            const auto d = oracle::discrete_moments(init, static_cast<int>(std::llround(t / dt)),
                                                    dt, lin, noise, dom);
            double g = 0.0;
            for (int j = 0; j < n; ++j) g += std::abs(d.var[j] - exact.var[j]);
            return g;
        };
        const double ratio = gap(0x1p-10) / gap(0x1p-11);
        rows.push_back({"moment_halving_ratio", ratio, 2.3, ratio >= 1.7 && ratio <= 2.3});
    }

    return finish_checks(cfg, "oracle-check", rows);
}

// Transform-based Galerkin projection against the coefficient-space reference, over
// random fields and a full cubic (odd and even terms), at several truncation levels.
int run_dealias_check(const RunConfig& cfg) {
    preflight_output(cfg, "dealias-check");
    std::vector<CheckRow> rows;
    const Domain dom(1.0);
    const CubicNonlinearity general(0.7, 0.4, -0.3, 0.2);
    for (int n : {2, 4, 8, 16}) {
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<double> c(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k)
                c[static_cast<std::size_t>(k)] =
                    rng::normal_draw(cfg.seed, static_cast<std::uint64_t>(1000 * n + rep), k) /
                    (1.0 + k);
            const SpectralField u(dom, c);
            const SpectralField fast = nemytskii(u, general);
            const SpectralField ref = oracle::brute_force_galerkin_cubic(u, general);
            double scale = 1e-30;
            for (double v : ref.coeffs()) scale = std::max(scale, std::abs(v));
            for (int k = 0; k < n; ++k)
                worst = std::max(worst, std::abs(fast.coeffs()[k] - ref.coeffs()[k]) / scale);
        }
        rows.push_back({"nemytskii_vs_reference_N" + std::to_string(n), worst, 1e-12,
                        worst <= 1e-12});
    }
    return finish_checks(cfg, "dealias-check", rows);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral Galerkin / implicit Euler solver for a stochastic "
                 "reaction-diffusion equation"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_file;
    std::vector<std::string> sets;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    std::string out_flag;
    bool print_config = false;

    app.add_option("--config", config_file, "INI-style config file");
    app.add_option("--set", sets, "override as section.key=value (repeatable)");
    auto* seed_opt = app.add_option("--seed", seed_flag, "master RNG seed");
    auto* workers_opt = app.add_option("--workers", workers_flag, "worker threads (0 = auto)");
    auto* out_opt = app.add_option("--out", out_flag, "output file prefix");
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    app.add_subcommand("weak", "temporal weak error curve over dt_list");
    app.add_subcommand("strong", "temporal strong (L2 distance) error curve");
    app.add_subcommand("spatial", "weak error across Galerkin levels n_list");
    app.add_subcommand("ergodicity", "ensemble averages from several initial conditions");
    app.add_subcommand("simulate", "integrate and dump a single trajectory");
    app.add_subcommand("oracle-check", "closed-form consistency battery");
    app.add_subcommand("dealias-check", "projection against the coefficient-space reference");

    CLI11_PARSE(app, argc, argv);

    std::vector<std::string> errors;
    std::vector<std::pair<std::string, std::string>> overrides;
    try {
        if (!config_file.empty())
            for (auto& kv : read_ini_file(config_file)) overrides.push_back(std::move(kv));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    for (auto& kv : env_overrides()) overrides.push_back(std::move(kv));
    for (const std::string& s : sets) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            errors.push_back("bad --set '" + s + "' (expected key=value)");
            continue;
        }
        overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }

    RunConfig cfg = apply_overrides(RunConfig{}, overrides, errors);
    if (seed_opt->count() > 0) cfg.seed = seed_flag;
    if (workers_opt->count() > 0) cfg.workers = workers_flag;
    if (out_opt->count() > 0) cfg.out_prefix = out_flag;

    for (const std::string& e : validate(cfg)) errors.push_back(e);
    if (!errors.empty()) {
        for (const std::string& e : errors) std::cerr << "config error: " << e << "\n";
        return 2;
    }

    if (print_config) {
        std::cout << canonical_text(cfg) << "# hash " << config_hash(cfg) << "\n";
        return 0;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    std::cout << "spde " << command << "  [config " << config_hash(cfg) << ", seed " << cfg.seed
              << "]\n";
    const auto t0 = std::chrono::steady_clock::now();
    int rc = 1;
    try {
        if (command == "weak") rc = run_weak(cfg);
        else if (command == "strong") rc = run_strong(cfg);
        else if (command == "spatial") rc = run_spatial(cfg);
        else if (command == "ergodicity") rc = run_ergodicity(cfg);
        else if (command == "simulate") rc = run_simulate(cfg);
        else if (command == "oracle-check") rc = run_oracle_check(cfg);
        else if (command == "dealias-check") rc = run_dealias_check(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  done in %.1fs\n", secs);
    return rc;
}
