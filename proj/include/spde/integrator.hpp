#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spde/field.hpp"
#include "spde/model.hpp"
#include "spde/noise.hpp"
#include "spde/spectral.hpp"

namespace spde {

enum class SolverKind { newton, fixed_point };

/// Largest admissible implicit Euler step: dt0 = min(1, 1 / max(2 lambda_f - 2 lambda_1, 0)),
/// with the convention that a nonpositive denominator (drift dominated by the spectral gap)
/// imposes no restriction, so dt0 = 1.  Below this threshold the implicit equation has a
/// unique solution and the linearized systems stay positive definite.
double step_constraint(const CubicNonlinearity& m, double length);

/// Parameters of the fully discrete scheme
///   x_{k+1} = R (x_k + dt F_N(x_{k+1}) + dw_k),   R = (I + dt A)^{-1}.
/// Construct through create(), which enforces dt <= step_constraint.
struct SchemeConfig {
    int n_modes = 1;
    double dt = 1.0;
    int steps = 0;
    SolverKind solver = SolverKind::newton;
    double tol = 1e-10;
    int max_iter = 50;
    double damping = 0.5;

    static SchemeConfig create(int n_modes, double dt, int steps, const CubicNonlinearity& m,
                               const Domain& domain, SolverKind solver = SolverKind::newton,
                               double tol = 1e-10, int max_iter = 50, double damping = 0.5);
};

/// Outcome of one implicit solve.
struct StepReport {
    int iterations = 0;
    double residual = 0.0;
    bool damped = false;
};

/// Aggregated solver behaviour over many steps.
struct SolveStats {
    int max_iterations = 0;
    long long total_iterations = 0;
    long long solves = 0;
    double max_residual = 0.0;
    bool any_damped = false;

    void absorb(const StepReport& r);
    void merge(const SolveStats& o);
};

/// Raised when the nonlinear solver fails to reach the tolerance.
struct SolveError : std::runtime_error {
    SolveError(const std::string& what, int iterations_, double residual_)
        : std::runtime_error(what), iterations(iterations_), residual(residual_) {}
    int iterations;
    double residual;
};

/// Which time levels simulate() keeps.
struct RecordPolicy {
    enum class Mode { final_only, every_step, stride };
    Mode mode = Mode::final_only;
    int stride = 1;

    static RecordPolicy final_only() { return {Mode::final_only, 1}; }
    static RecordPolicy every_step() { return {Mode::every_step, 1}; }
    static RecordPolicy strided(int s);
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;
    SolveStats stats;
};

/// Reusable per-trajectory engine: owns the transform tables, the Jacobian workspace and
/// the factorization scratch, so stepping costs no allocation.  Not thread-safe; use one
/// instance per worker thread.
class Stepper {
public:
    Stepper(Domain domain, SchemeConfig cfg, CubicNonlinearity model);

    const SchemeConfig& config() const { return cfg_; }
    const Domain& domain() const { return dom_; }
    const CubicNonlinearity& model() const { return model_; }

    /// Solve x - dt R F_N(x) = b.  The default initial guess is b itself.
    Eigen::VectorXd solve(const Eigen::VectorXd& b, StepReport& report,
                          const Eigen::VectorXd* guess = nullptr);

    /// One scheme step from x using the first n_modes entries of dw (missing entries are
    /// treated as undriven modes).
    Eigen::VectorXd step(const Eigen::VectorXd& x, std::span<const double> dw,
                         StepReport& report);

    /// Run cfg.steps steps from x0 consuming rows 0..steps-1 of the block.
    Trajectory simulate(const SpectralField& x0, const IncrementBlock& block,
                        RecordPolicy policy);

    /// Galerkin drift projection F_N at x (mainly for tests; uses the internal tables).
    Eigen::VectorXd drift(const Eigen::VectorXd& x);

private:
    void eval_drift(const Eigen::VectorXd& x);  // fills fx_, caches grid values in g_
    double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& b,
                    Eigen::VectorXd& out);      // out = x - b - dt R fx_, returns its norm
    Eigen::VectorXd solve_newton(const Eigen::VectorXd& b, double tol_eff, StepReport& rep);
    Eigen::VectorXd solve_fixed_point(const Eigen::VectorXd& b, double tol_eff,
                                      StepReport& rep);

    Domain dom_;
    SchemeConfig cfg_;
    CubicNonlinearity model_;
    SineBasis basis_;
    bool has_even_part_;

    Eigen::VectorXd lambda_;      // eigenvalues of the N retained modes
    Eigen::VectorXd ds_;          // 1 + dt lambda_k
    Eigen::VectorXd resolvent_;   // 1 / (1 + dt lambda_k)
    Eigen::MatrixXd even_mat_;    // closed-form sine projection of the even part (N x 4N)
    Eigen::VectorXd even_const_;  // contribution of the constant term a0

    // workspace
    Eigen::VectorXd g_, scratch_grid_, fx_, gmoments_, x_, xt_, gvec_, gt_, delta_, rhs_;
    Eigen::MatrixXd jac_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

// Convenience wrappers over a one-shot Stepper.

std::pair<SpectralField, StepReport>
implicit_solve(const Domain& domain, const SchemeConfig& cfg, const CubicNonlinearity& m,
               const SpectralField& b, std::optional<SpectralField> guess = std::nullopt);

std::pair<SpectralField, StepReport>
step(const Domain& domain, const SchemeConfig& cfg, const CubicNonlinearity& m,
     const SpectralField& x, std::span<const double> dw);

Trajectory simulate_path(const Domain& domain, const SchemeConfig& cfg,
                         const CubicNonlinearity& m, const SpectralField& x0,
                         const IncrementBlock& block,
                         RecordPolicy policy = RecordPolicy::final_only());

/// Stochastic convolution under the same discretization: z_{k+1} = R (z_k + dw_k),
/// z_0 = 0, returned at every time level 0..steps.
std::vector<SpectralField> z_convolution(const Domain& domain, const SchemeConfig& cfg,
                                         const IncrementBlock& block);

/// Pathwise remainder y_k = x_k - z_k of matching trajectories.
std::vector<SpectralField> y_split(const std::vector<SpectralField>& xs,
                                   const std::vector<SpectralField>& zs);

} // namespace spde
