#include "spde/integrator.hpp"

#include <cmath>
#include <string>

namespace spde {

double step_constraint(const CubicNonlinearity& m, double length) {
    const double gap = 2.0 * (lambda_f(m) - eigenvalue(1, length));
    if (gap <= 0.0) return 1.0;
    return std::min(1.0, 1.0 / gap);
}

SchemeConfig SchemeConfig::create(int n_modes, double dt, int steps, const CubicNonlinearity& m,
                                  const Domain& domain, SolverKind solver, double tol,
                                  int max_iter, double damping) {
    if (n_modes < 1)
        throw std::invalid_argument("SchemeConfig: n_modes must be >= 1");
    if (steps < 0)
        throw std::invalid_argument("SchemeConfig: steps must be >= 0");
    if (!std::isfinite(dt) || dt <= 0.0)
        throw std::invalid_argument("SchemeConfig: dt must be positive and finite");
    const double dt0 = step_constraint(m, domain.length);
    if (dt > dt0)
        throw std::invalid_argument("SchemeConfig: dt = " + std::to_string(dt) +
                                    " exceeds the solvability threshold dt0 = " +
                                    std::to_string(dt0) +
                                    " (= min(1, 1 / (2 lambda_f - 2 lambda_1)))");
    if (!std::isfinite(tol) || tol <= 0.0)
        throw std::invalid_argument("SchemeConfig: tol must be positive and finite");
    if (max_iter < 1)
        throw std::invalid_argument("SchemeConfig: max_iter must be >= 1");
    if (!(damping > 0.0) || !(damping < 1.0))
        throw std::invalid_argument("SchemeConfig: damping must lie in (0, 1)");
    SchemeConfig cfg;
    cfg.n_modes = n_modes;
    cfg.dt = dt;
    cfg.steps = steps;
    cfg.solver = solver;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.damping = damping;
    return cfg;
}

void SolveStats::absorb(const StepReport& r) {
    max_iterations = std::max(max_iterations, r.iterations);
    total_iterations += r.iterations;
    solves += 1;
    max_residual = std::max(max_residual, r.residual);
    any_damped = any_damped || r.damped;
}

void SolveStats::merge(const SolveStats& o) {
    max_iterations = std::max(max_iterations, o.max_iterations);
    total_iterations += o.total_iterations;
    solves += o.solves;
    max_residual = std::max(max_residual, o.max_residual);
    any_damped = any_damped || o.any_damped;
}

RecordPolicy RecordPolicy::strided(int s) {
    if (s < 1) throw std::invalid_argument("RecordPolicy: stride must be >= 1");
    return {Mode::stride, s};
}

Stepper::Stepper(Domain domain, SchemeConfig cfg, CubicNonlinearity model)
    : dom_(domain),
      // revalidate so hand-built configs cannot bypass the step constraint
      cfg_(SchemeConfig::create(cfg.n_modes, cfg.dt, cfg.steps, model, domain, cfg.solver,
                                cfg.tol, cfg.max_iter, cfg.damping)),
      model_(model),
      basis_(domain, cfg_.n_modes, 4 * cfg_.n_modes, /*with_cosines=*/true),
      has_even_part_(model.a2 != 0.0 || model.a0 != 0.0) {
    const int n = cfg_.n_modes;
    const int grid = basis_.n_grid();
    const int p = grid + 1;

    lambda_.resize(n);
    for (int k = 1; k <= n; ++k) lambda_(k - 1) = eigenvalue(k, dom_.length);
    ds_ = 1.0 + cfg_.dt * lambda_.array();
    resolvent_ = ds_.cwiseInverse();

    if (has_even_part_) {
        // Project the even part of f(u) (a cosine polynomial, zero at the boundary once
        // the constant a0 is split off) onto the sine modes: fold the trapezoidal DCT
        // weights and the closed-form overlaps into a single N x grid matrix.
        Eigen::MatrixXd fold(n, 2 * n + 1);
        for (int k = 1; k <= n; ++k)
            for (int m = 0; m <= 2 * n; ++m) {
                const double w = (m == 0) ? 1.0 / p : 2.0 / p;
                fold(k - 1, m) = w * detail::cosine_sine_overlap(m, k, dom_.length);
            }
        even_mat_.noalias() = fold * basis_.cosine_matrix().transpose();
        even_const_.resize(n);
        for (int k = 1; k <= n; ++k)
            even_const_(k - 1) = model_.a0 * detail::cosine_sine_overlap(0, k, dom_.length);
    }

    g_.resize(grid);
    scratch_grid_.resize(grid);
    fx_.resize(n);
    gmoments_.resize(2 * n + 1);
    gvec_.resize(n);
    gt_.resize(n);
    delta_.resize(n);
    rhs_.resize(n);
    jac_.resize(n, n);
}

void Stepper::eval_drift(const Eigen::VectorXd& x) {
    const auto& s = basis_.sine_matrix();
    g_.noalias() = s * x;
    scratch_grid_ = (-model_.a3 * g_.array().square() + model_.a1) * g_.array();
    const double w = dom_.length / static_cast<double>(basis_.n_grid() + 1);
    fx_.noalias() = w * (s.transpose() * scratch_grid_);
    if (has_even_part_) {
        scratch_grid_ = model_.a2 * g_.array().square();
        fx_.noalias() += even_mat_ * scratch_grid_;
        fx_ += even_const_;
    }
}

double Stepper::residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                         Eigen::VectorXd& out) {
    eval_drift(x);
    out = x - b - cfg_.dt * resolvent_.cwiseProduct(fx_);
    return out.norm();
}

Eigen::VectorXd Stepper::drift(const Eigen::VectorXd& x) {
    eval_drift(x);
    return fx_;
}

Eigen::VectorXd Stepper::solve(const Eigen::VectorXd& b, StepReport& report,
                               const Eigen::VectorXd* guess) {
    if (b.size() != cfg_.n_modes)
        throw std::invalid_argument("Stepper::solve: rhs has wrong dimension");
    if (guess && guess->size() != cfg_.n_modes)
        throw std::invalid_argument("Stepper::solve: guess has wrong dimension");
    report = StepReport{};
    x_ = guess ? *guess : b;
    const double tol_eff = cfg_.tol * (1.0 + b.norm());
    return cfg_.solver == SolverKind::newton ? solve_newton(b, tol_eff, report)
                                             : solve_fixed_point(b, tol_eff, report);
}

Eigen::VectorXd Stepper::solve_newton(const Eigen::VectorXd& b, double tol_eff,
                                      StepReport& rep) {
    const int n = cfg_.n_modes;
    const int p = basis_.n_grid() + 1;
    double rn = residual(x_, b, gvec_);

    while (rn > tol_eff) {
        if (rep.iterations >= cfg_.max_iter)
            throw SolveError("implicit solve: Newton did not reach tolerance " +
                                 std::to_string(tol_eff) + " within " +
                                 std::to_string(cfg_.max_iter) +
                                 " iterations (residual " + std::to_string(rn) + ")",
                             rep.iterations, rn);

        // Jacobian of the residual: D_S - dt B with B_{kl} = (C_{|k-l|} - C_{k+l}) / P,
        // C_m the cosine moments of f'(u) on the dealiasing grid (g_ caches the grid
        // values of the current iterate).  Under the step constraint this matrix is
        // symmetric positive definite.
        scratch_grid_ = (-3.0 * model_.a3 * g_.array().square() + 2.0 * model_.a2 * g_.array()) +
                        model_.a1;
        basis_.cosine_moments(scratch_grid_.data(), gmoments_.data());
        const double c = cfg_.dt / static_cast<double>(p);
        for (int k = 0; k < n; ++k) {
            for (int l = 0; l < k; ++l)
                jac_(k, l) = -c * (gmoments_(k - l) - gmoments_(k + l + 2));
            jac_(k, k) = ds_(k) - c * (gmoments_(0) - gmoments_(2 * k + 2));
        }

        llt_.compute(jac_);
        rhs_ = -ds_.cwiseProduct(gvec_);
        if (llt_.info() == Eigen::Success) {
            delta_ = llt_.solve(rhs_);
        } else {
            // Outside the SPD regime (possible only for badly conditioned inputs near
            // the constraint boundary): fall back to a pivoted solve.
            delta_ = jac_.selfadjointView<Eigen::Lower>().ldlt().solve(rhs_);
        }

        // Damped update: halve the step while the residual fails to decrease.
        double alpha = 1.0;
        double rt = 0.0;
        for (;;) {
            xt_ = x_ + alpha * delta_;
            rt = residual(xt_, b, gt_);
            if (rt < rn) break;
            if (alpha < 0x1p-40)
                throw SolveError("implicit solve: damped Newton stalled (residual " +
                                     std::to_string(rn) + ")",
                                 rep.iterations, rn);
            alpha *= cfg_.damping;
            rep.damped = true;
        }

        x_.swap(xt_);
        gvec_.swap(gt_);
        rn = rt;
        rep.iterations += 1;
    }

    rep.residual = rn;
    return x_;
}

Eigen::VectorXd Stepper::solve_fixed_point(const Eigen::VectorXd& b, double tol_eff,
                                           StepReport& rep) {
    double rn = residual(x_, b, gvec_);
    while (rn > tol_eff) {
        if (rep.iterations >= cfg_.max_iter)
            throw SolveError("implicit solve: fixed-point iteration did not reach tolerance " +
                                 std::to_string(tol_eff) + " within " +
                                 std::to_string(cfg_.max_iter) +
                                 " iterations (residual " + std::to_string(rn) + ")",
                             rep.iterations, rn);
        // fx_ holds the drift at the current iterate.
        x_ = b + cfg_.dt * resolvent_.cwiseProduct(fx_);
        rn = residual(x_, b, gvec_);
        rep.iterations += 1;
    }
    rep.residual = rn;
    return x_;
}

Eigen::VectorXd Stepper::step(const Eigen::VectorXd& x, std::span<const double> dw,
                              StepReport& report) {
    const int n = cfg_.n_modes;
    if (x.size() != n)
        throw std::invalid_argument("Stepper::step: state has wrong dimension");
    Eigen::VectorXd b = x;
    const int driven = std::min<int>(n, static_cast<int>(dw.size()));
    for (int j = 0; j < driven; ++j) b(j) += dw[j];
    b.array() *= resolvent_.array();
    return solve(b, report, &x); // previous time level as the initial guess
}

Trajectory Stepper::simulate(const SpectralField& x0, const IncrementBlock& block,
                             RecordPolicy policy) {
    const int n = cfg_.n_modes;
    const int k_end = cfg_.steps;
    if (block.steps() < k_end)
        throw std::invalid_argument("simulate: increment block has fewer rows than steps");
    if (std::abs(block.dt() - cfg_.dt) > 1e-12 * cfg_.dt)
        throw std::invalid_argument("simulate: increment block dt does not match the scheme");

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const int copy = std::min(n, x0.n_modes());
    for (int k = 0; k < copy; ++k) x(k) = x0.coeffs()[static_cast<std::size_t>(k)];

    const auto should_record = [&](int k) {
        switch (policy.mode) {
            case RecordPolicy::Mode::every_step: return true;
            case RecordPolicy::Mode::stride: return k % policy.stride == 0 || k == k_end;
            case RecordPolicy::Mode::final_only: return k == k_end;
        }
        return false;
    };

    Trajectory out;
    const auto record = [&](int k, const Eigen::VectorXd& v) {
        out.times.push_back(static_cast<double>(k) * cfg_.dt);
        out.states.emplace_back(dom_, std::vector<double>(v.data(), v.data() + n));
    };

    if (should_record(0)) record(0, x);
    for (int k = 0; k < k_end; ++k) {
        StepReport rep;
        try {
            x = step(x, std::span<const double>(block.row(k), static_cast<std::size_t>(block.modes())),
                     rep);
        } catch (const SolveError& e) {
            throw SolveError("step " + std::to_string(k) + ": " + e.what(), e.iterations,
                             e.residual);
        }
        out.stats.absorb(rep);
        if (should_record(k + 1)) record(k + 1, x);
    }
    return out;
}

std::pair<SpectralField, StepReport>
implicit_solve(const Domain& domain, const SchemeConfig& cfg, const CubicNonlinearity& m,
               const SpectralField& b, std::optional<SpectralField> guess) {
    Stepper st(domain, cfg, m);
    Eigen::Map<const Eigen::VectorXd> bv(b.coeffs().data(), b.n_modes());
    StepReport rep;
    Eigen::VectorXd x;
    if (guess) {
        Eigen::Map<const Eigen::VectorXd> gv(guess->coeffs().data(), guess->n_modes());
        Eigen::VectorXd g = gv;
        x = st.solve(bv, rep, &g);
    } else {
        x = st.solve(bv, rep);
    }
    return {SpectralField(domain, std::vector<double>(x.data(), x.data() + x.size())), rep};
}

std::pair<SpectralField, StepReport>
step(const Domain& domain, const SchemeConfig& cfg, const CubicNonlinearity& m,
     const SpectralField& x, std::span<const double> dw) {
    Stepper st(domain, cfg, m);
    Eigen::Map<const Eigen::VectorXd> xv(x.coeffs().data(), x.n_modes());
    StepReport rep;
    const Eigen::VectorXd y = st.step(xv, dw, rep);
    return {SpectralField(domain, std::vector<double>(y.data(), y.data() + y.size())), rep};
}

Trajectory simulate_path(const Domain& domain, const SchemeConfig& cfg,
                         const CubicNonlinearity& m, const SpectralField& x0,
                         const IncrementBlock& block, RecordPolicy policy) {
    Stepper st(domain, cfg, m);
    return st.simulate(x0, block, policy);
}

std::vector<SpectralField> z_convolution(const Domain& domain, const SchemeConfig& cfg,
                                         const IncrementBlock& block) {
    const int n = cfg.n_modes;
    if (block.steps() < cfg.steps)
        throw std::invalid_argument("z_convolution: increment block has fewer rows than steps");
    if (std::abs(block.dt() - cfg.dt) > 1e-12 * cfg.dt)
        throw std::invalid_argument("z_convolution: increment block dt does not match the scheme");

    std::vector<double> resolvent(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k)
        resolvent[k - 1] = 1.0 / (1.0 + cfg.dt * eigenvalue(k, domain.length));

    std::vector<SpectralField> out;
    out.reserve(static_cast<std::size_t>(cfg.steps) + 1);
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    out.emplace_back(domain, z);
    const int driven = std::min(n, block.modes());
    for (int k = 0; k < cfg.steps; ++k) {
        const double* row = block.row(k);
        for (int j = 0; j < n; ++j) {
            const double inc = j < driven ? row[j] : 0.0;
            z[static_cast<std::size_t>(j)] = resolvent[static_cast<std::size_t>(j)] *
                                             (z[static_cast<std::size_t>(j)] + inc);
        }
        out.emplace_back(domain, z);
    }
    return out;
}

std::vector<SpectralField> y_split(const std::vector<SpectralField>& xs,
                                   const std::vector<SpectralField>& zs) {
    if (xs.size() != zs.size())
        throw std::invalid_argument("y_split: trajectories have different lengths");
    std::vector<SpectralField> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].n_modes() != zs[i].n_modes())
            throw std::invalid_argument("y_split: mode counts differ at level " +
                                        std::to_string(i));
        std::vector<double> d(xs[i].coeffs());
        for (int k = 0; k < zs[i].n_modes(); ++k) d[static_cast<std::size_t>(k)] -=
            zs[i].coeffs()[static_cast<std::size_t>(k)];
        out.emplace_back(xs[i].domain(), std::move(d));
    }
    return out;
}

} // namespace spde
