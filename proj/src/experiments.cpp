#include "spde/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace spde {

double evaluate_functional(Functional phi, const SpectralField& u) {
    const double n2 = u.l2_norm_sq();
    switch (phi) {
        case Functional::cos_norm_sq: return std::cos(n2);
        case Functional::exp_neg_norm_sq: return std::exp(-n2);
        case Functional::sin_norm: return std::sin(std::sqrt(n2));
        case Functional::norm_4: return n2 * n2;
        case Functional::sin_norm_sq: return std::sin(n2);
        case Functional::sqrt2_cos_norm_sq_shift:
            return std::numbers::sqrt2 * std::cos(n2 - 0.25 * std::numbers::pi);
        case Functional::norm_sq: return n2;
    }
    throw std::logic_error("evaluate_functional: unknown functional");
}

std::string_view functional_name(Functional phi) {
    switch (phi) {
        case Functional::cos_norm_sq: return "cos_norm_sq";
        case Functional::exp_neg_norm_sq: return "exp_neg_norm_sq";
        case Functional::sin_norm: return "sin_norm";
        case Functional::norm_4: return "norm_4";
        case Functional::sin_norm_sq: return "sin_norm_sq";
        case Functional::sqrt2_cos_norm_sq_shift: return "sqrt2_cos_norm_sq_shift";
        case Functional::norm_sq: return "norm_sq";
    }
    return "unknown";
}

std::optional<Functional> functional_from_name(std::string_view name) {
    for (Functional f : {Functional::cos_norm_sq, Functional::exp_neg_norm_sq,
                         Functional::sin_norm, Functional::norm_4, Functional::sin_norm_sq,
                         Functional::sqrt2_cos_norm_sq_shift, Functional::norm_sq})
        if (functional_name(f) == name) return f;
    return std::nullopt;
}

SpectralField sine_initial(Domain domain, int n_modes, double amplitude) {
    SpectralField u = SpectralField::zero(domain, n_modes);
    std::vector<double> c = u.coeffs();
    c[0] = amplitude * std::sqrt(domain.length / 2.0);
    return SpectralField(domain, std::move(c));
}

int RateTable::n_excluded() const {
    int k = 0;
    for (const RateRow& r : rows)
        if (r.flag != RowFlag::ok) ++k;
    return k;
}

RateTable fit_rate(std::vector<RateRow> rows) {
    for (const RateRow& r : rows) {
        if (!std::isfinite(r.h) || r.h <= 0.0)
            throw std::invalid_argument("fit_rate: h values must be positive and finite");
        if (!std::isfinite(r.err) || r.err < 0.0)
            throw std::invalid_argument("fit_rate: errors must be >= 0 and finite");
    }
    std::sort(rows.begin(), rows.end(),
              [](const RateRow& a, const RateRow& b) { return a.h > b.h; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].h == rows[i - 1].h)
            throw std::invalid_argument("fit_rate: h values must be strictly decreasing");

    RateTable table;
    for (RateRow& r : rows)
        if (r.err == 0.0) r.flag = RowFlag::zero_error;
    table.rows = std::move(rows);

    std::vector<double> xs, ys;
    for (const RateRow& r : table.rows)
        if (r.flag == RowFlag::ok) {
            xs.push_back(std::log(r.h));
            ys.push_back(std::log(r.err));
        }
    const std::size_t m = xs.size();
    if (m < 3) return table;

    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        xm += xs[i];
        ym += ys[i];
    }
    xm /= static_cast<double>(m);
    ym /= static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
    }
    const double slope = sxy / sxx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double fit = ym + slope * (xs[i] - xm);
        ssr += (ys[i] - fit) * (ys[i] - fit);
    }
    table.slope = slope;
    table.slope_se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
    return table;
}

namespace {

int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run body(i) for i = 0..n-1 on `workers` threads.  Each thread gets its own body
/// instance from make_body (so bodies can own non-shareable workspaces); iterations are
/// claimed from an atomic counter.  The mapping i -> result must not depend on which
/// thread executes i; reductions happen afterwards, in index order, on the caller's side.
void run_parallel(long long n, int workers,
                  const std::function<std::function<void(long long)>()>& make_body) {
    workers = resolve_workers(workers);
    if (workers <= 1 || n <= 1) {
        auto body = make_body();
        for (long long i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<long long> next{0};
    std::atomic<bool> stop{false};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        try {
            auto body = make_body();
            for (;;) {
                const long long i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n || stop.load(std::memory_order_relaxed)) break;
                body(i);
            }
        } catch (...) {
            std::scoped_lock lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
            stop.store(true, std::memory_order_relaxed);
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

long long checked_multiple(double whole, double part, const char* what) {
    const long long k = std::llround(whole / part);
    if (k < 1 || std::abs(static_cast<double>(k) * part - whole) > 1e-9 * std::max(whole, 1.0))
        throw std::invalid_argument(std::string(what) + ": " + std::to_string(whole) +
                                    " is not a positive integer multiple of " +
                                    std::to_string(part));
    return k;
}

void require_same_domain(const Domain& a, const Domain& b, const char* what) {
    if (a.length != b.length)
        throw std::invalid_argument(std::string(what) + ": field domain does not match the "
                                                        "experiment domain");
}

/// Mean, standard error and count over the valid entries of a trajectory-indexed array,
/// accumulated in fixed index order so results do not depend on the worker count.
MCEstimate reduce(const std::vector<double>& vals, const std::vector<char>& ok,
                  long long n, const std::function<std::size_t(long long)>& at) {
    double sum = 0.0;
    long long m = 0;
    for (long long i = 0; i < n; ++i)
        if (ok[static_cast<std::size_t>(i)]) {
            sum += vals[at(i)];
            ++m;
        }
    const double mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (long long i = 0; i < n; ++i)
        if (ok[static_cast<std::size_t>(i)]) {
            const double d = vals[at(i)] - mean;
            ss += d * d;
        }
    const double var = m > 1 ? ss / static_cast<double>(m - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(m)), m};
}

void flag_noise_floor(std::vector<RateRow>& rows) {
    for (RateRow& r : rows)
        if (r.err < 3.0 * r.se) r.flag = RowFlag::noise_floor;
}

long long check_failures(long long failed, long long n, const char* what) {
    if (static_cast<double>(failed) > 0.001 * static_cast<double>(n))
        throw std::runtime_error(std::string(what) + ": " + std::to_string(failed) + " of " +
                                 std::to_string(n) +
                                 " trajectories failed to solve (> 0.1%), aborting");
    return failed;
}

struct TemporalEngineOut {
    std::vector<RateTable> weak;
    RateTable strong;
    SolveStats stats;
    long long failed = 0;
};

TemporalEngineOut temporal_engine(const TemporalCurveParams& p,
                                  const std::vector<Functional>& phis, bool want_strong) {
    const long long n = p.base.n_samples;
    if (n < 2) throw std::invalid_argument("temporal curve: need n_samples >= 2");
    if (!std::isfinite(p.t_final) || p.t_final <= 0.0)
        throw std::invalid_argument("temporal curve: t_final must be positive");
    if (!std::isfinite(p.dt_ref) || p.dt_ref <= 0.0)
        throw std::invalid_argument("temporal curve: dt_ref must be positive");
    if (p.dt_list.empty())
        throw std::invalid_argument("temporal curve: dt_list must not be empty");
    require_same_domain(p.base.domain, p.x0.domain(), "temporal curve");

    const long long k_ref_ll = checked_multiple(p.t_final, p.dt_ref, "temporal curve (t_final/dt_ref)");
    if (k_ref_ll > (1 << 24))
        throw std::invalid_argument("temporal curve: reference grid too fine");
    const int k_ref = static_cast<int>(k_ref_ll);

    std::vector<double> dts = p.dt_list;
    std::sort(dts.begin(), dts.end(), std::greater<>());
    for (std::size_t i = 1; i < dts.size(); ++i)
        if (dts[i] == dts[i - 1])
            throw std::invalid_argument("temporal curve: dt_list entries must be distinct");

    const int d_count = static_cast<int>(dts.size());
    std::vector<int> factors(static_cast<std::size_t>(d_count));
    std::vector<SchemeConfig> cfgs;
    cfgs.reserve(static_cast<std::size_t>(d_count));
    for (int d = 0; d < d_count; ++d) {
        const long long f = checked_multiple(dts[d], p.dt_ref, "temporal curve (dt/dt_ref)");
        if (k_ref % f != 0)
            throw std::invalid_argument("temporal curve: dt = " + std::to_string(dts[d]) +
                                        " does not divide the time horizon evenly");
        factors[d] = static_cast<int>(f);
        cfgs.push_back(SchemeConfig::create(p.n_modes, dts[d], static_cast<int>(k_ref / f),
                                            p.base.model, p.base.domain, p.base.solver,
                                            p.base.tol, p.base.max_iter, p.base.damping));
    }
    const SchemeConfig cfg_ref =
        SchemeConfig::create(p.n_modes, p.dt_ref, k_ref, p.base.model, p.base.domain,
                             p.base.solver, p.base.tol, p.base.max_iter, p.base.damping);

    const int f_count = static_cast<int>(phis.size());
    std::vector<double> ref_vals(static_cast<std::size_t>(n) * std::max(f_count, 1));
    std::vector<double> coarse_vals(static_cast<std::size_t>(n) * d_count * std::max(f_count, 1));
    std::vector<double> strong2(want_strong ? static_cast<std::size_t>(n) * d_count : 0);
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    std::vector<SolveStats> stats(static_cast<std::size_t>(n));

    const auto make_body = [&]() -> std::function<void(long long)> {
        auto ref_stepper = std::make_shared<Stepper>(p.base.domain, cfg_ref, p.base.model);
        auto coarse_steppers = std::make_shared<std::vector<Stepper>>();
        for (int d = 0; d < d_count; ++d)
            coarse_steppers->emplace_back(p.base.domain, cfgs[d], p.base.model);
        return [&, ref_stepper, coarse_steppers](long long i) {
            SolveStats st;
            try {
                const IncrementBlock block =
                    sample_increments(p.base.noise, p.base.seed, static_cast<std::uint64_t>(i),
                                      k_ref, p.dt_ref);
                const Trajectory ref =
                    ref_stepper->simulate(p.x0, block, RecordPolicy::final_only());
                st.merge(ref.stats);
                const SpectralField& x_ref = ref.states.back();
                for (int f = 0; f < f_count; ++f)
                    ref_vals[static_cast<std::size_t>(i) * f_count + f] =
                        evaluate_functional(phis[static_cast<std::size_t>(f)], x_ref);
                for (int d = 0; d < d_count; ++d) {
                    const IncrementBlock cb = coarsen(block, factors[d]);
                    const Trajectory tr =
                        (*coarse_steppers)[d].simulate(p.x0, cb, RecordPolicy::final_only());
                    st.merge(tr.stats);
                    const SpectralField& x_d = tr.states.back();
                    for (int f = 0; f < f_count; ++f)
                        coarse_vals[(static_cast<std::size_t>(i) * d_count + d) * f_count + f] =
                            evaluate_functional(phis[static_cast<std::size_t>(f)], x_d);
                    if (want_strong) {
                        double s = 0.0;
                        for (int k = 0; k < cfg_ref.n_modes; ++k) {
                            const double diff = x_d.coeffs()[static_cast<std::size_t>(k)] -
                                                x_ref.coeffs()[static_cast<std::size_t>(k)];
                            s += diff * diff;
                        }
                        strong2[static_cast<std::size_t>(i) * d_count + d] = s;
                    }
                }
                ok[static_cast<std::size_t>(i)] = 1;
            } catch (const SolveError&) {
                ok[static_cast<std::size_t>(i)] = 0;
            }
            stats[static_cast<std::size_t>(i)] = st;
        };
    };
    run_parallel(n, p.base.workers, make_body);

    TemporalEngineOut out;
    long long valid = 0;
    for (long long i = 0; i < n; ++i) {
        if (ok[static_cast<std::size_t>(i)]) {
            out.stats.merge(stats[static_cast<std::size_t>(i)]);
            ++valid;
        }
    }
    out.failed = check_failures(n - valid, n, "temporal curve");

    // Weak error: the mean of the pathwise functional differences, one row per dt.
    std::vector<double> diff(static_cast<std::size_t>(n));
    for (int f = 0; f < f_count; ++f) {
        std::vector<RateRow> rows;
        for (int d = 0; d < d_count; ++d) {
            for (long long i = 0; i < n; ++i)
                diff[static_cast<std::size_t>(i)] =
                    coarse_vals[(static_cast<std::size_t>(i) * d_count + d) * f_count + f] -
                    ref_vals[static_cast<std::size_t>(i) * f_count + f];
            const MCEstimate e = reduce(diff, ok, n,
                                        [](long long i) { return static_cast<std::size_t>(i); });
            rows.push_back({dts[static_cast<std::size_t>(d)], std::abs(e.mean), e.std_error,
                            e.n, RowFlag::ok});
        }
        flag_noise_floor(rows);
        out.weak.push_back(fit_rate(std::move(rows)));
    }

    if (want_strong) {
        std::vector<RateRow> rows;
        for (int d = 0; d < d_count; ++d) {
            const MCEstimate e = reduce(strong2, ok, n, [&](long long i) {
                return static_cast<std::size_t>(i) * d_count + d;
            });
            const double err = std::sqrt(std::max(e.mean, 0.0));
            const double se = err > 0.0 ? e.std_error / (2.0 * err) : 0.0;
            rows.push_back({dts[static_cast<std::size_t>(d)], err, se, e.n, RowFlag::ok});
        }
        flag_noise_floor(rows);
        out.strong = fit_rate(std::move(rows));
    }
    return out;
}

} // namespace

WeakCurveResult weak_error_curve(const TemporalCurveParams& params,
                                 const std::vector<Functional>& phis) {
    if (phis.empty())
        throw std::invalid_argument("weak_error_curve: need at least one functional");
    TemporalEngineOut eng = temporal_engine(params, phis, /*want_strong=*/false);
    WeakCurveResult out;
    out.functionals = phis;
    out.tables = std::move(eng.weak);
    out.stats = eng.stats;
    out.n_failed = eng.failed;
    return out;
}

StrongCurveResult strong_error_curve(const TemporalCurveParams& params) {
    TemporalEngineOut eng = temporal_engine(params, {}, /*want_strong=*/true);
    StrongCurveResult out;
    out.table = std::move(eng.strong);
    out.stats = eng.stats;
    out.n_failed = eng.failed;
    return out;
}

WeakCurveResult spatial_weak_error_curve(const SpatialCurveParams& p,
                                         const std::vector<Functional>& phis) {
    const long long n = p.base.n_samples;
    if (n < 2) throw std::invalid_argument("spatial curve: need n_samples >= 2");
    if (phis.empty())
        throw std::invalid_argument("spatial curve: need at least one functional");
    if (p.n_list.empty())
        throw std::invalid_argument("spatial curve: n_list must not be empty");
    require_same_domain(p.base.domain, p.x0.domain(), "spatial curve");

    const int k_steps = static_cast<int>(checked_multiple(p.t_final, p.dt, "spatial curve (t_final/dt)"));

    std::vector<int> levels = p.n_list;
    std::sort(levels.begin(), levels.end(), std::greater<>());
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] == levels[i - 1])
            throw std::invalid_argument("spatial curve: n_list entries must be distinct");
    for (int lvl : levels)
        if (lvl < 1 || lvl >= p.n_ref)
            throw std::invalid_argument("spatial curve: levels must satisfy 1 <= N < n_ref");

    const int l_count = static_cast<int>(levels.size());
    std::vector<SchemeConfig> cfgs;
    for (int lvl : levels)
        cfgs.push_back(SchemeConfig::create(lvl, p.dt, k_steps, p.base.model, p.base.domain,
                                            p.base.solver, p.base.tol, p.base.max_iter,
                                            p.base.damping));
    const SchemeConfig cfg_ref =
        SchemeConfig::create(p.n_ref, p.dt, k_steps, p.base.model, p.base.domain,
                             p.base.solver, p.base.tol, p.base.max_iter, p.base.damping);

    const int f_count = static_cast<int>(phis.size());
    std::vector<double> ref_vals(static_cast<std::size_t>(n) * f_count);
    std::vector<double> lvl_vals(static_cast<std::size_t>(n) * l_count * f_count);
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    std::vector<SolveStats> stats(static_cast<std::size_t>(n));

    const auto make_body = [&]() -> std::function<void(long long)> {
        auto ref_stepper = std::make_shared<Stepper>(p.base.domain, cfg_ref, p.base.model);
        auto lvl_steppers = std::make_shared<std::vector<Stepper>>();
        for (int l = 0; l < l_count; ++l)
            lvl_steppers->emplace_back(p.base.domain, cfgs[static_cast<std::size_t>(l)],
                                       p.base.model);
        return [&, ref_stepper, lvl_steppers](long long i) {
            SolveStats st;
            try {
                const IncrementBlock block =
                    sample_increments(p.base.noise, p.base.seed, static_cast<std::uint64_t>(i),
                                      k_steps, p.dt);
                const Trajectory ref =
                    ref_stepper->simulate(p.x0, block, RecordPolicy::final_only());
                st.merge(ref.stats);
                for (int f = 0; f < f_count; ++f)
                    ref_vals[static_cast<std::size_t>(i) * f_count + f] =
                        evaluate_functional(phis[static_cast<std::size_t>(f)], ref.states.back());
                for (int l = 0; l < l_count; ++l) {
                    const Trajectory tr =
                        (*lvl_steppers)[static_cast<std::size_t>(l)].simulate(
                            p.x0, block, RecordPolicy::final_only());
                    st.merge(tr.stats);
                    for (int f = 0; f < f_count; ++f)
                        lvl_vals[(static_cast<std::size_t>(i) * l_count + l) * f_count + f] =
                            evaluate_functional(phis[static_cast<std::size_t>(f)],
                                                tr.states.back());
                }
                ok[static_cast<std::size_t>(i)] = 1;
            } catch (const SolveError&) {
                ok[static_cast<std::size_t>(i)] = 0;
            }
            stats[static_cast<std::size_t>(i)] = st;
        };
    };
    run_parallel(n, p.base.workers, make_body);

    WeakCurveResult out;
    out.functionals = phis;
    long long valid = 0;
    for (long long i = 0; i < n; ++i)
        if (ok[static_cast<std::size_t>(i)]) {
            out.stats.merge(stats[static_cast<std::size_t>(i)]);
            ++valid;
        }
    out.n_failed = check_failures(n - valid, n, "spatial curve");

    std::vector<double> diff(static_cast<std::size_t>(n));
    for (int f = 0; f < f_count; ++f) {
        std::vector<RateRow> rows;
        for (int l = 0; l < l_count; ++l) {
            for (long long i = 0; i < n; ++i)
                diff[static_cast<std::size_t>(i)] =
                    lvl_vals[(static_cast<std::size_t>(i) * l_count + l) * f_count + f] -
                    ref_vals[static_cast<std::size_t>(i) * f_count + f];
            const MCEstimate e = reduce(diff, ok, n,
                                        [](long long i) { return static_cast<std::size_t>(i); });
            rows.push_back({eigenvalue(levels[static_cast<std::size_t>(l)], p.base.domain.length),
                            std::abs(e.mean), e.std_error, e.n, RowFlag::ok});
        }
        flag_noise_floor(rows);
        out.tables.push_back(fit_rate(std::move(rows)));
    }
    return out;
}

ErgodicitySeries ergodicity_run(const ErgodicityParams& p) {
    const long long n = p.base.n_samples;
    if (n < 2) throw std::invalid_argument("ergodicity_run: need n_samples >= 2");
    if (p.inits.empty())
        throw std::invalid_argument("ergodicity_run: need at least one initial condition");
    if (p.phis.empty())
        throw std::invalid_argument("ergodicity_run: need at least one functional");
    for (const SpectralField& x0 : p.inits)
        require_same_domain(p.base.domain, x0.domain(), "ergodicity_run");

    const int k_steps = static_cast<int>(checked_multiple(p.t_final, p.dt, "ergodicity_run (t_final/dt)"));
    const int stride = p.stride > 0 ? p.stride : std::max(1, k_steps / 64);
    const SchemeConfig cfg =
        SchemeConfig::create(p.n_modes, p.dt, k_steps, p.base.model, p.base.domain,
                             p.base.solver, p.base.tol, p.base.max_iter, p.base.damping);

    std::vector<int> rec;
    for (int k = 0; k <= k_steps; k += stride) rec.push_back(k);
    if (rec.back() != k_steps) rec.push_back(k_steps);
    const int r_count = static_cast<int>(rec.size());
    const int a_count = static_cast<int>(p.inits.size());
    const int f_count = static_cast<int>(p.phis.size());

    std::vector<double> vals(static_cast<std::size_t>(a_count) * f_count * r_count *
                             static_cast<std::size_t>(n));
    std::vector<char> ok(static_cast<std::size_t>(n), 0);
    std::vector<SolveStats> stats(static_cast<std::size_t>(n));
    const auto slot = [&](int a, int f, int r, long long i) {
        return ((static_cast<std::size_t>(a) * f_count + f) * r_count + r) *
                   static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    };

    const auto make_body = [&]() -> std::function<void(long long)> {
        auto stepper = std::make_shared<Stepper>(p.base.domain, cfg, p.base.model);
        return [&, stepper](long long i) {
            SolveStats st;
            try {
                // One increment block per trajectory index, shared by all initial
                // conditions: the ensembles are synchronously coupled.
                const IncrementBlock block =
                    sample_increments(p.base.noise, p.base.seed, static_cast<std::uint64_t>(i),
                                      k_steps, p.dt);
                for (int a = 0; a < a_count; ++a) {
                    const Trajectory tr =
                        stepper->simulate(p.inits[static_cast<std::size_t>(a)], block,
                                          RecordPolicy::strided(stride));
                    st.merge(tr.stats);
                    for (int r = 0; r < r_count; ++r)
                        for (int f = 0; f < f_count; ++f)
                            vals[slot(a, f, r, i)] = evaluate_functional(
                                p.phis[static_cast<std::size_t>(f)],
                                tr.states[static_cast<std::size_t>(r)]);
                }
                ok[static_cast<std::size_t>(i)] = 1;
            } catch (const SolveError&) {
                ok[static_cast<std::size_t>(i)] = 0;
            }
            stats[static_cast<std::size_t>(i)] = st;
        };
    };
    run_parallel(n, p.base.workers, make_body);

    ErgodicitySeries out;
    long long valid = 0;
    for (long long i = 0; i < n; ++i)
        if (ok[static_cast<std::size_t>(i)]) {
            out.stats.merge(stats[static_cast<std::size_t>(i)]);
            ++valid;
        }
    out.n_failed = check_failures(n - valid, n, "ergodicity_run");

    out.times.reserve(static_cast<std::size_t>(r_count));
    for (int r = 0; r < r_count; ++r)
        out.times.push_back(static_cast<double>(rec[static_cast<std::size_t>(r)]) * p.dt);

    out.estimates.resize(static_cast<std::size_t>(a_count));
    for (int a = 0; a < a_count; ++a) {
        out.estimates[static_cast<std::size_t>(a)].resize(static_cast<std::size_t>(f_count));
        for (int f = 0; f < f_count; ++f) {
            auto& series = out.estimates[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)];
            series.resize(static_cast<std::size_t>(r_count));
            for (int r = 0; r < r_count; ++r)
                series[static_cast<std::size_t>(r)] =
                    reduce(vals, ok, n, [&](long long i) { return slot(a, f, r, i); });
        }
    }
    return out;
}

} // namespace spde
